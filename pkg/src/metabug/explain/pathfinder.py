"""Feasible highest-attention path construction.

The search works over branch decisions.  The initial path greedily takes
whichever arm holds the larger share of highlighted statements (the bug
kind's integral statements plus the ten most-attended ones).  While the
decided path is infeasible, the branch contributing the least attention
is re-decided: a bare ``if`` block or a loop body is dropped, an
``if``/``else`` is replaced by the best sub-path through its opposite
arm.  Every candidate is rebuilt from the initial path, so each attempt
differs from it by exactly one block, and the search stops once it has
touched every branch on the path.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..collectors import TestSlice
from ..minilang import ast as A
from ..nn.gnn import AttentionMap, GraphTensors, graph_tensors
from .report import TraceReport, decorate_trace
from .symex import PathResult, feasibility, proc_of_stmt

TOP_N = 10          # highlighted statements beyond the integral ones
_SUBPATH_CAP = 256  # alternative sub-paths tried per branch


@dataclass
class PathCandidate:
    """A fully decided path: every branch and loop has a chosen arm."""

    decisions: dict[int, str]       # branch stmt nid -> then/else/enter/skip
    statements: tuple[int, ...]     # covered statement nids, execution order
    score: float                    # attention mass of covered highlights


def integral_statements(slc: TestSlice) -> frozenset[int]:
    """The statements every counterexample of this kind must execute."""
    return frozenset(slc.integral) | {slc.bug_point}


def top_n_attended(slc: TestSlice, attention: AttentionMap,
                   n: int = TOP_N,
                   tensors: GraphTensors | None = None) -> list[int]:
    """The n most-attended statements, with integral ones always kept."""
    gt = tensors if tensors is not None else graph_tensors(slc.build_graph())
    mass = attention.by_statement(gt)
    order = sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))
    top = [nid for nid, _ in order[:n]]
    for nid in sorted(integral_statements(slc)):
        if nid not in top:
            top.append(nid)
    return top


# -- branch scoring -------------------------------------------------------


class _Chooser:
    """Assigns an arm to every branch of the walked procedures."""

    def __init__(self, selected: set[int], required: frozenset[int],
                 weights: dict[int, float], rng: random.Random):
        self.selected = selected
        self.required = required
        self.weights = weights
        self.rng = rng
        self.decisions: dict[int, str] = {}
        self.arm_score: dict[int, float] = {}   # branch nid -> chosen arm score
        self.locked: set[int] = set()

    def _stmt_w(self, s: A.Stmt) -> float:
        return self.weights.get(s.nid, 0.0) if s.nid in self.selected else 0.0

    def best(self, body: list[A.Stmt]) -> tuple[float, bool]:
        """(best path score through body, contains-required)."""
        score, req = 0.0, False
        for s in body:
            score += self._stmt_w(s)
            req |= s.nid in self.required
            if isinstance(s, A.If):
                t = self.best(s.then_body)
                e = self.best(s.else_body)
                req |= t[1] or e[1]
                score += max(t[0], e[0])
            elif isinstance(s, A.While):
                b = self.best(s.body)
                req |= b[1]
                score += max(b[0], 0.0)
        return score, req

    def choose(self, body: list[A.Stmt]) -> None:
        for s in body:
            if isinstance(s, A.If):
                t_score, t_req = self.best(s.then_body)
                e_score, e_req = self.best(s.else_body)
                if t_req or e_req:
                    arm = "then" if t_req else "else"
                    self.locked.add(s.nid)
                elif t_score == e_score == 0.0 and not self._arm_selected(s):
                    arm = self.rng.choice(("then", "else"))
                else:
                    arm = "then" if t_score >= e_score else "else"
                self.decisions[s.nid] = arm
                self.arm_score[s.nid] = t_score if arm == "then" else e_score
                self.choose(s.then_body)
                self.choose(s.else_body)
            elif isinstance(s, A.While):
                b_score, b_req = self.best(s.body)
                if b_req:
                    arm = "enter"
                    self.locked.add(s.nid)
                else:
                    arm = "enter" if b_score > 0.0 else "skip"
                self.decisions[s.nid] = arm
                self.arm_score[s.nid] = b_score if arm == "enter" else 0.0
                self.choose(s.body)

    def _arm_selected(self, s: A.If) -> bool:
        """Does either arm hold a highlighted statement at all?"""
        def any_sel(body: list[A.Stmt]) -> bool:
            for x in body:
                if x.nid in self.selected:
                    return True
                if isinstance(x, A.If) and (any_sel(x.then_body)
                                            or any_sel(x.else_body)):
                    return True
                if isinstance(x, A.While) and any_sel(x.body):
                    return True
            return False
        return any_sel(s.then_body) or any_sel(s.else_body)


def _branch_stmts(program: A.Program, proc_names: list[str]) -> list[A.Stmt]:
    out: list[A.Stmt] = []
    for p in program.procs:
        if p.name in proc_names:
            out.extend(s for s in A.proc_statements(p)
                       if isinstance(s, (A.If, A.While)))
    return out


def _subtree_branches(s: A.Stmt) -> list[A.Stmt]:
    body = []
    if isinstance(s, A.If):
        body = s.then_body + s.else_body
    elif isinstance(s, A.While):
        body = s.body
    out = []
    for c in body:
        if isinstance(c, (A.If, A.While)):
            out.append(c)
        out.extend(_subtree_branches(c))
    return out


def _opposite_arm(s: A.Stmt, arm: str) -> tuple[str, list[A.Stmt]]:
    if isinstance(s, A.If):
        return ("else", s.else_body) if arm == "then" else ("then", s.then_body)
    return ("skip", []) if arm == "enter" else ("enter", s.body)


def _assignments(branches: list[A.Stmt], locked: dict[int, str],
                 cap: int) -> list[dict[int, str]]:
    """Every decision combination over the given branch statements."""
    out: list[dict[int, str]] = [{}]
    for b in branches:
        arms = [locked[b.nid]] if b.nid in locked else (
            ["then", "else"] if isinstance(b, A.If) else ["enter", "skip"])
        out = [dict(a, **{b.nid: arm}) for a in out for arm in arms]
        if len(out) > cap:
            out = out[:cap]
    return out


# -- the search -----------------------------------------------------------


def is_path_feasible(path: PathCandidate, slc: TestSlice) -> bool:
    """Decide a candidate by under-constrained symbolic execution."""
    ok, _, _ = feasibility(slc, path.decisions)
    return ok


def _walk_procs(slc: TestSlice) -> list[str]:
    if slc.bug_kind == "RACE" and slc.finding is not None:
        return list(slc.finding.procs)
    return [proc_of_stmt(slc.program, slc.bug_point)]


def find_feasible_path(slc: TestSlice, attention: AttentionMap,
                       n: int = TOP_N, seed: int = 0,
                       tensors: GraphTensors | None = None) -> TraceReport:
    """Search for a feasible path covering the most-attended statements.

    When every 1-block variation is exhausted without a feasible path,
    the best-scoring candidate is reported flagged infeasible rather
    than suppressed.
    """
    gt = tensors if tensors is not None else graph_tensors(slc.build_graph())
    weights = attention.by_statement(gt)
    required = integral_statements(slc)
    selected = set(top_n_attended(slc, attention, n, tensors=gt)) | required
    procs = _walk_procs(slc)

    chooser = _Chooser(selected, required, weights, random.Random(seed))
    for p in slc.program.procs:
        if p.name in procs:
            chooser.choose(p.body)
    initial = chooser.decisions

    cache: dict[tuple, tuple[bool, str, PathResult]] = {}

    def evaluate(decisions: dict[int, str]) -> tuple[PathCandidate, bool, str]:
        key = tuple(sorted(decisions.items()))
        if key not in cache:
            cache[key] = feasibility(slc, decisions)
        ok, formula, pr = cache[key]
        covered = [nid for nid in pr.statements]
        score = sum(weights.get(nid, 0.0) for nid in set(covered)
                    if nid in selected)
        return PathCandidate(decisions, tuple(covered), score), ok, formula

    cand, feas, formula = evaluate(initial)
    tried = [(cand, formula)]

    on_path = set(cand.statements)
    pool = [s for s in _branch_stmts(slc.program, procs)
            if s.nid in on_path and s.nid not in chooser.locked]
    pool.sort(key=lambda s: (chooser.arm_score[s.nid], s.nid))

    while not feas and pool:
        b = pool.pop(0)
        opp_arm, opp_body = _opposite_arm(b, initial[b.nid])
        nested = _subtree_branches(b) if opp_body else []
        nested = [x for x in nested if _contains(opp_body, x)]
        locked_arms = {nid: initial[nid] for nid in chooser.locked}
        options = _assignments(nested, locked_arms, _SUBPATH_CAP)

        options.sort(key=lambda asg: _scored_under(chooser, opp_body, asg),
                     reverse=True)
        picked = None
        for asg in options:
            trial = dict(initial)
            trial[b.nid] = opp_arm
            trial.update(asg)
            cand2, ok2, f2 = evaluate(trial)
            if picked is None:
                picked = (cand2, ok2, f2)
            if ok2:
                picked = (cand2, ok2, f2)
                break
        if picked is None:  # opposite arm had no decision combinations
            trial = dict(initial)
            trial[b.nid] = opp_arm
            picked = evaluate(trial)
        cand, feas, formula = picked
        tried.append((cand, formula))

    if not feas:
        cand, formula = max(tried, key=lambda t: t[0].score)
    return decorate_trace(cand.statements, slc, stmt_weights=weights,
                          feasible=feas, constraint=formula)


def _contains(body: list[A.Stmt], target: A.Stmt) -> bool:
    for s in body:
        if s is target:
            return True
        if isinstance(s, A.If) and (_contains(s.then_body, target)
                                    or _contains(s.else_body, target)):
            return True
        if isinstance(s, A.While) and _contains(s.body, target):
            return True
    return False


def _scored_under(chooser: _Chooser, body: list[A.Stmt],
                  asg: dict[int, str]) -> float:
    """Highlight mass of one decided walk through ``body``."""
    total = 0.0
    for s in body:
        total += chooser._stmt_w(s)
        if isinstance(s, A.If):
            arm = asg.get(s.nid, "then")
            total += _scored_under(
                chooser, s.then_body if arm == "then" else s.else_body, asg)
        elif isinstance(s, A.While):
            if asg.get(s.nid, "skip") == "enter":
                total += _scored_under(chooser, s.body, asg)
    return total
