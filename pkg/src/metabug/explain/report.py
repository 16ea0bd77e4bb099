"""Human-facing buggy-trace reports.

A trace is rendered over the slice's own source: statements numbered in
execution order, the bug point in a bounding box with everything after
it cut off, and the most-attended steps underlined.  A report can also
be checked against recorded ground truth: it counts as correct when it
contains the minimal witness trace and stays within the full witness
trace, both as index-monotone subsequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..collectors import TestSlice
from ..minilang import ast as A
from ..minilang.printer import pretty_print_with_lines
from ..synthgen.interp import ProgramInput, interpret

KEY_STEPS = 3  # underlined statements per trace


@dataclass
class TraceReport:
    """One explained bug candidate, ready for rendering."""

    slice_id: str
    statements: tuple[int, ...]      # executed order; bug point is last
    line_of: dict[int, int]          # stmt nid -> 1-based line in the source
    text_of: dict[int, str]          # stmt nid -> first source line, stripped
    bug_point: int
    key_steps: frozenset[int]
    feasible: bool
    path_constraint: str

    def render_text(self) -> str:
        flag = "feasible" if self.feasible else "NO FEASIBLE PATH; best candidate"
        out = [f"slice {self.slice_id}  [{flag}]",
               f"path constraint: {self.path_constraint}", ""]
        width = max((len(self.text_of[n]) for n in self.statements), default=0)
        box = "    +" + "-" * (width + 4) + "+"
        for i, nid in enumerate(self.statements, start=1):
            text = self.text_of[nid]
            if nid == self.bug_point:
                out.append(box)
                out.append(f"{i:3d} | {text.ljust(width + 2)} |")
                out.append(box)
            else:
                out.append(f"{i:3d} | {text}")
                if nid in self.key_steps:
                    out.append("    | " + "~" * len(text))
        return "\n".join(out) + "\n"

    def to_json(self, rank: int | None = None,
                distance: float | None = None) -> dict:
        return {
            "slice_id": self.slice_id,
            "rank": rank,
            "distance": distance,
            "feasible": self.feasible,
            "trace": [
                {
                    "n": i,
                    "loc": self.line_of[nid],
                    "text": self.text_of[nid],
                    "underlined": nid in self.key_steps,
                }
                for i, nid in enumerate(self.statements, start=1)
            ],
            "bug_point": self.bug_point,
            "constraint": self.path_constraint,
        }


def decorate_trace(statements: Sequence[int], slc: TestSlice,
                   stmt_weights: dict[int, float] | None = None,
                   feasible: bool = True,
                   constraint: str = "true") -> TraceReport:
    """Turn an executed statement sequence into a decorated report.

    Everything after the bug point is dropped; the ``KEY_STEPS``
    highest-attended surviving statements (bug point aside, its box
    already singles it out) get underlined.
    """
    text, line_of = pretty_print_with_lines(slc.program)
    src_lines = text.splitlines()
    stmts = list(statements)
    if slc.bug_point in stmts:
        stmts = stmts[:stmts.index(slc.bug_point) + 1]
    weights = stmt_weights or {}
    candidates = [n for n in set(stmts) if n != slc.bug_point]
    candidates.sort(key=lambda n: (-weights.get(n, 0.0), n))
    key = frozenset(candidates[:KEY_STEPS])
    return TraceReport(
        slice_id=slc.slice_id,
        statements=tuple(stmts),
        line_of={n: line_of[n] for n in stmts},
        text_of={n: src_lines[line_of[n] - 1].strip() for n in stmts},
        bug_point=slc.bug_point,
        key_steps=key,
        feasible=feasible,
        path_constraint=constraint,
    )


def is_subsequence(needle: Iterable[int], haystack: Iterable[int]) -> bool:
    """True when ``needle`` appears in ``haystack`` in order (gaps allowed)."""
    it = iter(haystack)
    return all(any(x == y for y in it) for x in needle)


def truth_input(truth: dict) -> ProgramInput:
    rec = truth["input"]
    return ProgramInput(
        values=dict(rec["values"]),
        failures=frozenset(rec["failures"]),
        schedule=tuple(rec["schedule"]),
    )


def evaluate_trace(trace: Sequence[int], truth: dict,
                   program: A.Program) -> bool:
    """Judge a predicted trace against recorded ground truth.

    The prediction is correct when it contains every statement of the
    minimal witness trace and introduces nothing beyond the full witness
    run, both in execution order."""
    t_min = tuple(truth["minimal_trace"])
    full = interpret(program, truth_input(truth)).trace
    return is_subsequence(t_min, trace) and is_subsequence(trace, full)
