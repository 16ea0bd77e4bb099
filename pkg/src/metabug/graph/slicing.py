"""Backward slicing over the interprocedural dependence graph.

A slice is computed at statement granularity: starting from the criterion
statement (optionally restricted to some of its variables), walk dependence
edges backwards — data deps into each kept statement's leaves, control deps
into its root, parameter and call edges across procedure boundaries — until
closure.  The kept statements are then rebuilt into a valid, runnable MBL
program that preserves the original node ids, so downstream artifacts
(ground truth, traces, reports) can keep naming statements by id.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..minilang import ast as A
from .cfg import stmt_eval_exprs
from .pdg import EdgeKind, NodeKind, Pdg, PdgNode


@dataclass(frozen=True)
class SliceCriterion:
    stmt_nid: int
    variables: tuple[str, ...] = ()


def _leaf_parents(graph: Pdg) -> dict[int, PdgNode]:
    """Map leaf id -> its parent vertex when that parent is a synthetic
    parameter vertex (actual-in/out, formal-in/out)."""
    vertex_kinds = {
        NodeKind.ACTUAL_IN, NodeKind.ACTUAL_OUT,
        NodeKind.FORMAL_IN, NodeKind.FORMAL_OUT,
    }
    out: dict[int, PdgNode] = {}
    for e in graph.edges:
        if e.kind == EdgeKind.AST_CHILD and graph.nodes[e.src].kind in vertex_kinds:
            out[e.dst] = graph.nodes[e.src]
    return out


def slice_statement_ids(graph: Pdg, criterion: SliceCriterion) -> frozenset[int]:
    """Statement node ids in the backward slice from `criterion`."""
    nodes = graph.nodes
    crit = nodes.get(criterion.stmt_nid)
    if crit is None or not crit.stmt_root or crit.kind not in (
        NodeKind.AST_INTERNAL, NodeKind.CALL_SITE,
    ):
        raise ValueError(f"criterion {criterion.stmt_nid} is not a statement in the graph")

    in_edges = graph.in_edges()
    leaf_parent = _leaf_parents(graph)
    leaves_by_stmt: dict[int, list[PdgNode]] = {}
    for n in nodes.values():
        if n.kind == NodeKind.AST_LEAF and n.var is not None and n.stmt_nid is not None:
            leaves_by_stmt.setdefault(n.stmt_nid, []).append(n)

    kept: set[int] = set()
    kept_procs: set[str] = set()
    work: deque[tuple[int, tuple[str, ...] | None]] = deque()
    work.append((criterion.stmt_nid, criterion.variables or None))

    def push(stmt_nid: int | None) -> None:
        if stmt_nid is not None and stmt_nid not in kept:
            work.append((stmt_nid, None))

    def keep_proc(name: str) -> None:
        if name in kept_procs:
            return
        kept_procs.add(name)
        entry = graph.entry_of.get(name)
        if entry is None:
            return
        for e in in_edges.get(entry, []):
            if e.kind == EdgeKind.CALL:
                push(nodes[e.src].stmt_nid)

    def pull_source(d: PdgNode) -> None:
        if d.stmt_nid is not None:
            push(d.stmt_nid)
            parent = leaf_parent.get(d.nid)
            if parent is not None and parent.kind == NodeKind.ACTUAL_OUT:
                # a write-back def: pull the callee statements it summarizes
                for e in in_edges.get(parent.nid, []):
                    if e.kind == EdgeKind.PARAM_OUT:
                        fo = nodes[e.src]
                        for ce in graph.edges:
                            if ce.src == fo.nid and ce.kind == EdgeKind.AST_CHILD:
                                for de in in_edges.get(ce.dst, []):
                                    if de.kind == EdgeKind.DATA_DEP:
                                        pull_source(nodes[de.src])
            return
        parent = leaf_parent.get(d.nid)
        if parent is not None and parent.kind == NodeKind.FORMAL_IN:
            # parameter definition: pull every caller's argument statement
            keep_proc(d.proc)
            for e in in_edges.get(parent.nid, []):
                if e.kind == EdgeKind.PARAM_IN:
                    push(nodes[e.src].stmt_nid)

    while work:
        s, restrict = work.popleft()
        if s in kept:
            continue
        kept.add(s)
        keep_proc(nodes[s].proc)
        for e in in_edges.get(s, []):
            if e.kind == EdgeKind.CONTROL_DEP:
                src = nodes[e.src]
                if src.stmt_nid is not None:
                    push(src.stmt_nid)
        for leaf in leaves_by_stmt.get(s, []):
            if restrict is not None and leaf.var not in restrict:
                continue
            for e in in_edges.get(leaf.nid, []):
                if e.kind == EdgeKind.DATA_DEP:
                    pull_source(nodes[e.src])

    return frozenset(kept)


def _mentioned_vars(s: A.Stmt) -> set[str]:
    """Variable names a statement reads or writes when it executes."""
    names: set[str] = set()
    if isinstance(s, A.Assign):
        t = s.target
        names.add(t.name if isinstance(t, A.Var) else t.base.name)
    for e in stmt_eval_exprs(s):
        for n in A.walk(e):
            if isinstance(n, A.Var):
                names.add(n.name)
    return names


def rebuild_from_statements(program: A.Program, stmt_ids: frozenset[int] | set[int]) -> A.Program:
    """Prune `program` down to `stmt_ids`, keeping structure and node ids.

    Syntactic ancestors of kept statements are retained (a statement cannot
    survive without its enclosing branches), as are the declarations of every
    procedure that is kept or called from a kept statement.  Variables that a
    kept statement mentions but whose declaration fell outside the slice get
    the declaration pulled back in with its initializer replaced by a plain
    literal — the value was irrelevant to the criterion, so no behavior rides
    in with it.  `main` always remains, since a program without it is not
    runnable."""
    kept = set(stmt_ids)
    neutral: set[int] = set()  # declarations kept for validity only

    def add_ancestors(body: list[A.Stmt], anc: tuple[int, ...]) -> None:
        for s in body:
            if s.nid in kept:
                kept.update(anc)
            if isinstance(s, A.If):
                add_ancestors(s.then_body, anc + (s.nid,))
                add_ancestors(s.else_body, anc + (s.nid,))
            elif isinstance(s, A.While):
                add_ancestors(s.body, anc + (s.nid,))

    def close_ancestors() -> None:
        for p in program.procs:
            add_ancestors(p.body, ())
        add_ancestors(list(program.globals), ())

    close_ancestors()

    global_decls = {g.target.name: g for g in program.globals}
    changed = True
    while changed:
        changed = False
        for p in program.procs:
            local_decls = {
                s.target.name: s for s in A.proc_statements(p) if isinstance(s, A.VarDecl)
            }
            params = {prm.name for prm in p.params}
            for s in A.proc_statements(p):
                if s.nid not in kept or (s.nid in neutral):
                    continue
                for name in _mentioned_vars(s):
                    if name in params:
                        continue
                    decl = local_decls.get(name) or global_decls.get(name)
                    if decl is not None and decl.nid not in kept:
                        kept.add(decl.nid)
                        neutral.add(decl.nid)
                        changed = True
        if changed:
            close_ancestors()

    def prune(body: list[A.Stmt]) -> list[A.Stmt]:
        out: list[A.Stmt] = []
        for s in body:
            if s.nid not in kept:
                continue
            if isinstance(s, A.If):
                out.append(A.If(s.nid, s.loc, s.cond, prune(s.then_body), prune(s.else_body)))
            elif isinstance(s, A.While):
                out.append(A.While(s.nid, s.loc, s.cond, prune(s.body)))
            elif s.nid in neutral:
                out.append(A.VarDecl(s.nid, s.loc, s.target, A.IntLit(s.value.nid, s.loc, 0)))
            else:
                out.append(s)
        return out

    globals_pruned = [
        (A.VarDecl(g.nid, g.loc, g.target, A.IntLit(g.value.nid, g.loc, 0))
         if g.nid in neutral else g)
        for g in program.globals if g.nid in kept
    ]
    kept_procs: set[str] = {"main"}
    for p in program.procs:
        if any(s.nid in kept for s in A.proc_statements(p)):
            kept_procs.add(p.name)
    # call targets of kept statements must stay declared
    changed = True
    while changed:
        changed = False
        for p in program.procs:
            if p.name not in kept_procs:
                continue
            for s in A.proc_statements(p):
                if s.nid in kept and isinstance(s, (A.CallStmt, A.SpawnStmt)):
                    if s.name not in A.BUILTINS and s.name not in kept_procs:
                        kept_procs.add(s.name)
                        changed = True

    procs = [
        A.Procedure(p.nid, p.loc, p.name, list(p.params), prune(p.body))
        for p in program.procs
        if p.name in kept_procs
    ]
    return A.Program(program.nid, program.loc, globals_pruned, procs, source="")


def backward_slice(graph: Pdg, criterion: SliceCriterion) -> A.Program:
    """The runnable backward-slice program for `criterion`."""
    return rebuild_from_statements(graph.program, slice_statement_ids(graph, criterion))
