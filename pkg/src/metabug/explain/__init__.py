"""Prediction interpretation: feasible attended paths and trace reports."""

from .linsolve import (
    Constraint, Feasibility, LinExpr, UnsupportedConstraint, check_feasible,
    eq, le, render_conjunction,
)
from .pathfinder import (
    PathCandidate, find_feasible_path, integral_statements, is_path_feasible,
    top_n_attended,
)
from .report import (
    TraceReport, decorate_trace, evaluate_trace, is_subsequence, truth_input,
)
from .symex import PathResult, feasibility, proc_of_stmt, symexec

__all__ = [
    "Constraint", "Feasibility", "LinExpr", "PathCandidate", "PathResult",
    "TraceReport", "UnsupportedConstraint", "check_feasible", "decorate_trace",
    "eq", "evaluate_trace", "feasibility", "find_feasible_path",
    "integral_statements", "is_path_feasible", "is_subsequence", "le",
    "proc_of_stmt", "render_conjunction", "symexec", "top_n_attended",
    "truth_input",
]
