"""Bug-specific slice collectors.

Each collector scans a program for the structural footprint of one bug kind
and emits a ``TestSlice`` per candidate site: a runnable backward-slice
program plus the ids a checker needs (the bug point, and the integral
statements that any counterexample trace must touch).  Collectors are
deliberately over-approximate — they flag *candidates*, not bugs; telling
the two apart is the ranking model's job.

Candidate footprints:

* NPD  — a null-producing assignment that can reach a dereference of the
  same variable along some CFG path in the same procedure.
* AIO  — any array read or write.
* NFE  — any string-to-int parse call.
* LEAK — a handle-producing ``open`` from which EXIT is reachable without
  passing a ``close`` of that handle.
* RACE — a variable shared with a spawned procedure that the spawned
  procedure overwrites from a local value or expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph.cfg import EXIT, Cfg, reaches, stmt_eval_exprs
from .graph.pdg import EdgeKind, NodeKind, Pdg, PdgEdge, build_ipdg
from .graph.slicing import SliceCriterion, rebuild_from_statements, slice_statement_ids
from .minilang import ast as A
from .minilang.printer import pretty_print

BUG_KINDS = ("NPD", "AIO", "NFE", "LEAK", "RACE")

# builtins whose argument is dereferenced (null there faults at runtime)
_DEREF_BUILTINS = ("length", "close")


@dataclass(frozen=True)
class SharedVarFinding:
    """A variable handed to a spawned procedure that the spawned procedure
    overwrites.  ``update_sequence`` is the def-use chain from the sharing
    point to the write: (spawn stmt, write stmt)."""

    variable: str          # name on the spawning side
    param: str             # name inside the spawned procedure ("" for globals)
    update_sequence: tuple[int, ...]
    write_point: int
    procs: tuple[str, str]  # (spawning proc, spawned proc)


@dataclass
class TestSlice:
    """One candidate bug site packaged as a runnable program slice."""

    bug_kind: str
    bug_point: int                   # statement nid the checker reports on
    integral: tuple[int, ...]        # statements every counterexample must execute
    program: A.Program               # sliced program, original nids preserved
    criterion: SliceCriterion
    key: tuple[int, ...]             # site identity within (origin, bug_kind)
    origin: str = ""                 # label of the source program (set by callers)
    finding: SharedVarFinding | None = None

    def __post_init__(self) -> None:
        stmts = {s.nid for p in self.program.procs for s in A.proc_statements(p)}
        stmts |= {g.nid for g in self.program.globals}
        if self.bug_point not in stmts:
            raise ValueError(f"bug point {self.bug_point} fell out of its own slice")
        missing = [n for n in self.integral if n not in stmts]
        if missing:
            raise ValueError(f"integral statements {missing} fell out of the slice")

    @property
    def slice_id(self) -> str:
        site = "-".join(str(k) for k in self.key)
        return f"{self.origin or 'prog'}:{self.bug_kind}:{site}"

    def source(self) -> str:
        return pretty_print(self.program)

    def build_graph(self) -> Pdg:
        """Dependence graph of the slice, with cross-procedure data edges
        for the shared variable added on RACE slices."""
        g = build_ipdg(self.program)
        if self.finding is not None:
            apply_race_links(g, self.finding)
        return g

    def to_manifest(self) -> dict:
        return {
            "bug_kind": self.bug_kind,
            "bug_point": self.bug_point,
            "integral": list(self.integral),
            "source": self.source(),
            "criterion": {
                "stmt": self.criterion.stmt_nid,
                "variables": list(self.criterion.variables),
            },
            "key": list(self.key),
            "origin": self.origin,
        }


# --- shared walking helpers --------------------------------------------------


def _proc_stmts(program: A.Program, proc: A.Procedure) -> list[A.Stmt]:
    """Statements of `proc` in source order; main also owns the globals
    (they execute in its frame, and its CFG includes them)."""
    out: list[A.Stmt] = []
    if proc.name == "main":
        out.extend(program.globals)
    out.extend(A.proc_statements(proc))
    return out


def _builtin_args_at(stmt: A.Stmt, name: str) -> list[list[A.Expr]]:
    """Argument lists of every call to builtin `name` the statement makes,
    covering both the expression form and the bare statement form."""
    out: list[list[A.Expr]] = []
    if isinstance(stmt, A.CallStmt) and stmt.name == name:
        out.append(list(stmt.args))
    for e in stmt_eval_exprs(stmt):
        for n in A.walk(e):
            if isinstance(n, A.BuiltinCall) and n.name == name:
                out.append(list(n.args))
    return out


def _derefed_vars(stmt: A.Stmt) -> list[str]:
    """Variables dereferenced while evaluating `stmt`: index bases plus
    arguments of builtins that fault on null."""
    out: list[str] = []
    for e in stmt_eval_exprs(stmt):
        for n in A.walk(e):
            if isinstance(n, A.Index):
                out.append(n.base.name)
    for b in _DEREF_BUILTINS:
        for args in _builtin_args_at(stmt, b):
            if len(args) == 1 and isinstance(args[0], A.Var):
                out.append(args[0].name)
    return out


def _reads_var(stmt: A.Stmt, name: str) -> bool:
    for e in stmt_eval_exprs(stmt):
        for n in A.walk(e):
            if isinstance(n, A.Var) and n.name == name:
                if isinstance(stmt, (A.VarDecl, A.Assign)) and n is stmt.target:
                    continue  # plain write target, not a read
                return True
    return False


def _null_source(stmt: A.Stmt) -> str | None:
    """Variable that `stmt` may set to null, if any.  Null enters a program
    through literals and through absent input keys."""
    if not isinstance(stmt, (A.VarDecl, A.Assign)) or not isinstance(stmt.target, A.Var):
        return None
    v = stmt.value
    if isinstance(v, A.NullLit):
        return stmt.target.name
    if isinstance(v, A.BuiltinCall) and v.name == "read_input":
        return stmt.target.name
    return None


def _def_stmts_of_leaf(graph: Pdg, leaf_nid: int) -> list[int]:
    """Statement nids whose definitions flow into the use leaf `leaf_nid`
    (definitions coming from procedure entry have no statement and are
    skipped)."""
    out: set[int] = set()
    for e in graph.edges:
        if e.kind == EdgeKind.DATA_DEP and e.dst == leaf_nid:
            src = graph.nodes[e.src]
            if src.stmt_nid is not None:
                out.add(src.stmt_nid)
    return sorted(out)


def _slice_union(
    graph: Pdg, seeds: list[SliceCriterion]
) -> frozenset[int]:
    ids: set[int] = set()
    for c in seeds:
        ids |= slice_statement_ids(graph, c)
    return frozenset(ids)


def _make_slice(
    graph: Pdg,
    kind: str,
    bug_point: int,
    integral: tuple[int, ...],
    criterion: SliceCriterion,
    key: tuple[int, ...],
    extra_seeds: tuple[SliceCriterion, ...] = (),
    finding: SharedVarFinding | None = None,
) -> TestSlice:
    ids = _slice_union(graph, [criterion, *extra_seeds])
    ids |= set(integral)
    sliced = rebuild_from_statements(graph.program, ids)
    return TestSlice(
        bug_kind=kind,
        bug_point=bug_point,
        integral=integral,
        program=sliced,
        criterion=criterion,
        key=key,
        finding=finding,
    )


# --- the five collectors -----------------------------------------------------


def collect_npd(program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    """Null-producing assignments that can flow into a dereference.

    One slice per (source stmt, deref stmt) pair of the same variable where
    the dereference is CFG-reachable from the source within the procedure.
    Reachability ignores intervening reassignment on purpose: a re-definition
    on *some* paths is exactly the shape of a missing check."""
    graph = graph or build_ipdg(program)
    out: list[TestSlice] = []
    for proc in program.procs:
        cfg = graph.cfgs[proc.name]
        stmts = _proc_stmts(program, proc)
        sources = [(s.nid, v) for s in stmts if (v := _null_source(s))]
        derefs = [(s.nid, v) for s in stmts for v in _derefed_vars(s)]
        for l1, v in sources:
            for l2, dv in derefs:
                if dv != v or l1 == l2:
                    continue
                if not reaches(cfg, l1, l2):
                    continue
                crit = SliceCriterion(l2, (v,))
                out.append(_make_slice(
                    graph, "NPD", bug_point=l2, integral=(l1, l2),
                    criterion=crit, key=(l1, l2),
                    extra_seeds=(SliceCriterion(l1),),
                ))
    return out


def collect_aio(program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    """Every array read or write is a bounds-check candidate.

    The slice covers the full data dependence of both the array and the
    index; the integral set is the operation plus the definitions feeding
    the array there."""
    graph = graph or build_ipdg(program)
    out: list[TestSlice] = []
    for proc in program.procs:
        for s in _proc_stmts(program, proc):
            for e in stmt_eval_exprs(s):
                for n in A.walk(e):
                    if not isinstance(n, A.Index):
                        continue
                    idx_vars = tuple(sorted({
                        x.name for x in A.walk(n.index) if isinstance(x, A.Var)
                    }))
                    crit = SliceCriterion(s.nid, (n.base.name, *idx_vars))
                    arr_defs = _def_stmts_of_leaf(graph, n.base.nid)
                    integral = tuple(sorted({s.nid, *arr_defs}))
                    out.append(_make_slice(
                        graph, "AIO", bug_point=s.nid, integral=integral,
                        criterion=crit, key=(s.nid, n.nid),
                    ))
    return out


def collect_nfe(program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    """Every string-to-int parse is a format-failure candidate; the integral
    set ties the parse to the definitions of the parsed string."""
    graph = graph or build_ipdg(program)
    out: list[TestSlice] = []
    for proc in program.procs:
        for s in _proc_stmts(program, proc):
            for args in _builtin_args_at(s, "parseInt"):
                arg = args[0]
                if isinstance(arg, A.Var):
                    crit = SliceCriterion(s.nid, (arg.name,))
                    str_defs = _def_stmts_of_leaf(graph, arg.nid)
                else:
                    crit = SliceCriterion(s.nid)
                    str_defs = []
                integral = tuple(sorted({s.nid, *str_defs}))
                out.append(_make_slice(
                    graph, "NFE", bug_point=s.nid, integral=integral,
                    criterion=crit, key=(s.nid, arg.nid),
                ))
    return out


def _close_stmts(stmts: list[A.Stmt], handle: str | None) -> list[int]:
    if handle is None:
        return []
    out = []
    for s in stmts:
        for args in _builtin_args_at(s, "close"):
            if isinstance(args[0], A.Var) and args[0].name == handle:
                out.append(s.nid)
    return out


def collect_leak(program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    """Opens from which the procedure can exit without closing the handle.

    The early-exit edge of the open itself is skipped (a failed open produces
    no handle); every other path to EXIT that avoids all `close(h)` statements
    is a leak witness.  A close on *some* paths but not others — e.g. a close
    placed after a later may-fail call — still reports."""
    graph = graph or build_ipdg(program)
    out: list[TestSlice] = []
    for proc in program.procs:
        cfg = graph.cfgs[proc.name]
        stmts = _proc_stmts(program, proc)
        for s in stmts:
            if not _builtin_args_at(s, "open"):
                continue
            handle = None
            if (isinstance(s, (A.VarDecl, A.Assign)) and isinstance(s.target, A.Var)
                    and isinstance(s.value, A.BuiltinCall) and s.value.name == "open"):
                handle = s.target.name
            removed = frozenset(_close_stmts(stmts, handle))
            leaky = any(
                n not in removed and reaches(cfg, n, EXIT, removed)
                for n in cfg.normal_succ(s.nid)
            )
            if not leaky:
                continue
            crit = SliceCriterion(s.nid)
            out.append(_make_slice(
                graph, "LEAK", bug_point=s.nid, integral=(s.nid,),
                criterion=crit, key=(s.nid,),
            ))
    return out


def _is_propagation(value: A.Expr, callee: A.Procedure) -> bool:
    """True when an assignment merely forwards another parameter, rather
    than computing a fresh value."""
    return isinstance(value, A.Var) and any(
        p.name == value.name for p in callee.params
    )


def collect_race(program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    """Variables shared with a spawned procedure that the spawned procedure
    overwrites with a locally computed value.

    Sharing is found structurally: a spawn argument propagates the caller's
    variable into the callee's parameter, and globals are visible everywhere.
    The slice packs both sides — the write with its context, the spawn, and
    every statement on the spawning side that reads the variable."""
    graph = graph or build_ipdg(program)
    global_names = {g.target.name for g in program.globals}
    out: list[TestSlice] = []
    for proc in program.procs:
        stmts = _proc_stmts(program, proc)
        spawns = [s for s in stmts if isinstance(s, A.SpawnStmt)]
        seen: set[tuple[int, int]] = set()
        for sp in spawns:
            callee = program.proc(sp.name)
            shared: list[tuple[str, str]] = []  # (caller-side name, callee-side name)
            for i, p in enumerate(callee.params):
                if isinstance(sp.args[i], A.Var):
                    shared.append((sp.args[i].name, p.name))
            param_names = {p.name for p in callee.params}
            for g in sorted(global_names - param_names):
                shared.append((g, g))
            for caller_name, callee_name in shared:
                for w in A.proc_statements(callee):
                    if not isinstance(w, A.Assign):
                        continue
                    tgt = w.target
                    tgt_name = tgt.name if isinstance(tgt, A.Var) else tgt.base.name
                    if tgt_name != callee_name:
                        continue
                    if _is_propagation(w.value, callee):
                        continue
                    if (sp.nid, w.nid) in seen:
                        continue
                    seen.add((sp.nid, w.nid))
                    finding = SharedVarFinding(
                        variable=caller_name,
                        param=callee_name if callee_name in param_names else "",
                        update_sequence=(sp.nid, w.nid),
                        write_point=w.nid,
                        procs=(proc.name, callee.name),
                    )
                    reads = tuple(
                        SliceCriterion(s.nid, (caller_name,))
                        for s in stmts
                        if s.nid != sp.nid and _reads_var(s, caller_name)
                    )
                    crit = SliceCriterion(w.nid, (callee_name,))
                    out.append(_make_slice(
                        graph, "RACE", bug_point=w.nid,
                        integral=(sp.nid, w.nid),
                        criterion=crit, key=(sp.nid, w.nid),
                        extra_seeds=(SliceCriterion(sp.nid), *reads),
                        finding=finding,
                    ))
    return out


def apply_race_links(graph: Pdg, finding: SharedVarFinding) -> list[PdgEdge]:
    """Add data-dependence edges from the racing write to every read of the
    shared variable on the spawning side, making the interference visible in
    the dependence graph.  Returns the edges added."""
    spawner, spawned = finding.procs
    write = graph.program.node(finding.write_point)
    tgt = write.target
    src_leaf = tgt.nid if isinstance(tgt, A.Var) else tgt.base.nid

    def is_read(n) -> bool:
        if n.stmt_nid is not None and n.ast_nid is not None:
            s = graph.program.node(n.stmt_nid)
            if isinstance(s, (A.VarDecl, A.Assign)) and isinstance(s.target, A.Var) \
                    and s.target.nid == n.ast_nid:
                return False  # plain definition target
        # synthetic copy-out leaves are definitions of the caller variable
        for e in graph.edges:
            if e.kind == EdgeKind.AST_CHILD and e.dst == n.nid \
                    and graph.nodes[e.src].kind == NodeKind.ACTUAL_OUT:
                return False
        return True

    added: list[PdgEdge] = []
    existing = set(graph.edges)
    for n in sorted(graph.nodes.values(), key=lambda n: n.nid):
        if (n.kind == NodeKind.AST_LEAF and n.var == finding.variable
                and n.proc == spawner and n.nid != src_leaf and is_read(n)):
            e = PdgEdge(src_leaf, n.nid, EdgeKind.DATA_DEP)
            if e not in existing:
                graph.edges.append(e)
                added.append(e)
    return added


_COLLECTORS = {
    "NPD": collect_npd,
    "AIO": collect_aio,
    "NFE": collect_nfe,
    "LEAK": collect_leak,
    "RACE": collect_race,
}


def collect_all(program: A.Program, graph: Pdg | None = None) -> dict[str, list[TestSlice]]:
    """Run every collector over `program`; one shared graph build."""
    graph = graph or build_ipdg(program)
    return {kind: _COLLECTORS[kind](program, graph) for kind in BUG_KINDS}


def collect(kind: str, program: A.Program, graph: Pdg | None = None) -> list[TestSlice]:
    if kind not in _COLLECTORS:
        raise ValueError(f"unknown bug kind {kind!r}; expected one of {BUG_KINDS}")
    return _COLLECTORS[kind](program, graph)
