"""Interprocedural program dependence graph (IPDG) construction.

Every statement becomes a small AST: a statement-root node with its operand
subtree below it (`ast-child` edges).  Dependences connect statements at the
right granularity:

* `control-dep` edges run branch-root -> statement-root (computed from
  postdominators on the statement-level CFG, with may-fail early exits);
* `exec-order` edges chain *successive* siblings that execute under the same
  controller and branch arm, never crossing a loop's back edge;
* `data-dep` edges run definition-leaf -> use-leaf, from reaching
  definitions iterated to a fixed point (so a loop-carried def reaches uses
  across the back edge);
* procedure boundaries get the classic vertex quartet: a `call-site` root
  per call, `actual-in`/`formal-in` pairs per argument, and
  `actual-out`/`formal-out` pairs for by-reference parameters only (a
  by-value callee cannot write back, so there is nothing to model).

`spawn` is a call site like any other here; what makes it interesting is
handled by the race collector, not the graph.

A singleton `meta` node can be attached with links to every native node; it
is the read/write port the attention-based embedding uses, and the graph is
connected once it is present.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..minilang import ast as A
from ..minilang.ast import Loc
from . import cfg as C
from .cfg import Cfg, Definition
from .vocab import IdentBuckets, token_for_expr, token_for_stmt


class NodeKind(Enum):
    AST_INTERNAL = "ast-internal"
    AST_LEAF = "ast-leaf"
    ENTRY = "entry"
    CALL_SITE = "call-site"
    ACTUAL_IN = "actual-in"
    ACTUAL_OUT = "actual-out"
    FORMAL_IN = "formal-in"
    FORMAL_OUT = "formal-out"
    META = "meta"


class EdgeKind(Enum):
    AST_CHILD = "ast-child"
    CONTROL_DEP = "control-dep"
    DATA_DEP = "data-dep"
    EXEC_ORDER = "exec-order"
    CALL = "call"
    PARAM_IN = "param-in"
    PARAM_OUT = "param-out"
    META_LINK = "meta-link"


# kinds that act like statements for the control/order invariants
_STMT_LIKE = {
    NodeKind.ENTRY, NodeKind.CALL_SITE, NodeKind.ACTUAL_IN,
    NodeKind.ACTUAL_OUT, NodeKind.FORMAL_IN, NodeKind.FORMAL_OUT,
}


class AlreadyAttachedError(Exception):
    pass


class NoMetaNodeError(Exception):
    pass


@dataclass
class PdgNode:
    nid: int
    kind: NodeKind
    token: str
    stmt_root: bool
    proc: str
    ast_nid: int | None = None  # source AST node id, when derived from one
    stmt_nid: int | None = None  # statement this node belongs to
    var: str | None = None  # variable name on identifier leaves
    loc: Loc | None = None


@dataclass(frozen=True)
class PdgEdge:
    src: int
    dst: int
    kind: EdgeKind


@dataclass
class Pdg:
    nodes: dict[int, PdgNode]
    edges: list[PdgEdge]
    entry_of: dict[str, int]
    program: A.Program
    meta_id: int | None = None
    cfgs: dict[str, Cfg] = field(default_factory=dict)

    def native_ids(self) -> list[int]:
        return [n for n in self.nodes if n != self.meta_id]

    def in_edges(self) -> dict[int, list[PdgEdge]]:
        out: dict[int, list[PdgEdge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            out[e.dst].append(e)
        return out

    def out_edges(self) -> dict[int, list[PdgEdge]]:
        out: dict[int, list[PdgEdge]] = {n: [] for n in self.nodes}
        for e in self.edges:
            out[e.src].append(e)
        return out

    def stmt_leaves(self, stmt_nid: int) -> list[PdgNode]:
        return [
            n for n in self.nodes.values()
            if n.stmt_nid == stmt_nid and n.kind == NodeKind.AST_LEAF
        ]


def _prime_ident_buckets(program: A.Program) -> IdentBuckets:
    """Bucket identifiers by first occurrence in parse order, program-wide."""
    idents = IdentBuckets()
    for node in A.walk_program(program):
        if isinstance(node, A.Procedure):
            for prm in node.params:
                idents.token(prm.name)
        elif isinstance(node, A.Var):
            idents.token(node.name)
    return idents


@dataclass
class _StmtInfo:
    """Dependence bookkeeping for one statement."""

    root: int
    defs: list[Definition] = field(default_factory=list)
    uses: list[tuple[str, int]] = field(default_factory=list)  # (var, leaf id)


class _Builder:
    def __init__(self, program: A.Program):
        self.program = program
        self.idents = _prime_ident_buckets(program)
        self.next_id = max(n.nid for n in A.walk_program(program)) + 1
        self.nodes: dict[int, PdgNode] = {}
        self.edges: list[PdgEdge] = []
        self.entry_of: dict[str, int] = {}
        self.cfgs: dict[str, Cfg] = {}
        # per proc: parallel lists over params
        self.formal_in: dict[str, list[int]] = {}
        self.formal_out: dict[str, dict[int, int]] = {}  # param idx -> vertex id
        # call site wiring gathered during statement builds
        self.calls: list[tuple[A.CallStmt | A.SpawnStmt, list[int], dict[int, int]]] = []

    def fresh(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def add_node(self, node: PdgNode) -> int:
        self.nodes[node.nid] = node
        return node.nid

    def edge(self, src: int, dst: int, kind: EdgeKind) -> None:
        self.edges.append(PdgEdge(src, dst, kind))

    # -- AST subtrees --------------------------------------------------------

    def build_expr(self, e: A.Expr, proc: str, stmt_nid: int,
                   uses: list[tuple[str, int]] | None) -> int:
        """Create PDG nodes for expression `e`; returns the subtree root id.
        Var leaves are recorded in `uses` (pass None for defining positions)."""
        token = token_for_expr(e, self.idents)
        kids = A.children(e)
        kind = NodeKind.AST_LEAF if not kids else NodeKind.AST_INTERNAL
        var = e.name if isinstance(e, A.Var) else None
        self.add_node(PdgNode(e.nid, kind, token, False, proc, e.nid, stmt_nid, var, e.loc))
        if isinstance(e, A.Var) and uses is not None:
            uses.append((e.name, e.nid))
        for c in kids:
            cid = self.build_expr(c, proc, stmt_nid, uses)
            self.edge(e.nid, cid, EdgeKind.AST_CHILD)
        return e.nid

    def synth_var_leaf(self, name: str, proc: str, stmt_nid: int | None, loc: Loc | None) -> int:
        nid = self.fresh()
        self.add_node(PdgNode(
            nid, NodeKind.AST_LEAF, self.idents.token(name), False, proc,
            None, stmt_nid, name, loc,
        ))
        return nid

    # -- statements ----------------------------------------------------------

    def build_stmt(self, s: A.Stmt, proc: str) -> _StmtInfo:
        info = _StmtInfo(root=s.nid)
        token = token_for_stmt(s)
        is_call = isinstance(s, (A.CallStmt, A.SpawnStmt)) and (
            isinstance(s, A.SpawnStmt) or s.name not in A.BUILTINS
        )
        kind = NodeKind.CALL_SITE if is_call else NodeKind.AST_INTERNAL
        self.add_node(PdgNode(s.nid, kind, token, True, proc, s.nid, s.nid, None, s.loc))

        if isinstance(s, A.VarDecl):
            tgt = s.target
            self.add_node(PdgNode(
                tgt.nid, NodeKind.AST_LEAF, self.idents.token(tgt.name), False,
                proc, tgt.nid, s.nid, tgt.name, tgt.loc,
            ))
            self.edge(s.nid, tgt.nid, EdgeKind.AST_CHILD)
            rid = self.build_expr(s.value, proc, s.nid, info.uses)
            self.edge(s.nid, rid, EdgeKind.AST_CHILD)
            info.defs.append(Definition(tgt.name, tgt.nid, s.nid, strong=True))
        elif isinstance(s, A.Assign):
            if isinstance(s.target, A.Index):
                base = s.target.base
                self.add_node(PdgNode(
                    s.target.nid, NodeKind.AST_INTERNAL, "index", False, proc,
                    s.target.nid, s.nid, None, s.target.loc,
                ))
                self.edge(s.nid, s.target.nid, EdgeKind.AST_CHILD)
                self.add_node(PdgNode(
                    base.nid, NodeKind.AST_LEAF, self.idents.token(base.name),
                    False, proc, base.nid, s.nid, base.name, base.loc,
                ))
                self.edge(s.target.nid, base.nid, EdgeKind.AST_CHILD)
                iid = self.build_expr(s.target.index, proc, s.nid, info.uses)
                self.edge(s.target.nid, iid, EdgeKind.AST_CHILD)
                # an element store reads the array and (weakly) redefines it
                info.uses.append((base.name, base.nid))
                info.defs.append(Definition(base.name, base.nid, s.nid, strong=False))
            else:
                tgt = s.target
                self.add_node(PdgNode(
                    tgt.nid, NodeKind.AST_LEAF, self.idents.token(tgt.name),
                    False, proc, tgt.nid, s.nid, tgt.name, tgt.loc,
                ))
                self.edge(s.nid, tgt.nid, EdgeKind.AST_CHILD)
                info.defs.append(Definition(tgt.name, tgt.nid, s.nid, strong=True))
            rid = self.build_expr(s.value, proc, s.nid, info.uses)
            self.edge(s.nid, rid, EdgeKind.AST_CHILD)
        elif isinstance(s, (A.If, A.While)):
            cid = self.build_expr(s.cond, proc, s.nid, info.uses)
            self.edge(s.nid, cid, EdgeKind.AST_CHILD)
        elif isinstance(s, (A.CallStmt, A.SpawnStmt)) and is_call:
            callee = self.program.proc(s.name)
            actual_ins: list[int] = []
            actual_outs: dict[int, int] = {}
            for i, (arg, prm) in enumerate(zip(s.args, callee.params)):
                av = self.fresh()
                self.add_node(PdgNode(av, NodeKind.ACTUAL_IN, "actual-in", True,
                                      proc, None, s.nid, None, s.loc))
                self.edge(s.nid, av, EdgeKind.CONTROL_DEP)
                rid = self.build_expr(arg, proc, s.nid, info.uses)
                self.edge(av, rid, EdgeKind.AST_CHILD)
                actual_ins.append(av)
                if prm.by_ref:
                    assert isinstance(arg, A.Var)
                    ov = self.fresh()
                    self.add_node(PdgNode(ov, NodeKind.ACTUAL_OUT, "actual-out",
                                          True, proc, None, s.nid, None, s.loc))
                    self.edge(s.nid, ov, EdgeKind.CONTROL_DEP)
                    leaf = self.synth_var_leaf(arg.name, proc, s.nid, s.loc)
                    self.edge(ov, leaf, EdgeKind.AST_CHILD)
                    actual_outs[i] = ov
                    # the write-back lands after the call returns
                    info.defs.append(Definition(arg.name, leaf, s.nid, strong=False))
            self.calls.append((s, actual_ins, actual_outs))
        elif isinstance(s, A.CallStmt):  # builtin in statement position
            for arg in s.args:
                rid = self.build_expr(arg, proc, s.nid, info.uses)
                self.edge(s.nid, rid, EdgeKind.AST_CHILD)
        elif isinstance(s, A.Return):
            pass
        else:  # pragma: no cover
            raise TypeError(type(s).__name__)
        return info

    # -- one procedure ---------------------------------------------------------

    def build_proc(self, proc: A.Procedure, extra_body: list[A.Stmt]) -> None:
        entry = self.fresh()
        self.add_node(PdgNode(entry, NodeKind.ENTRY, "entry", True, proc.name,
                              None, None, None, proc.loc))
        self.entry_of[proc.name] = entry

        entry_defs: list[Definition] = []
        self.formal_in[proc.name] = []
        self.formal_out[proc.name] = {}
        for i, prm in enumerate(proc.params):
            fv = self.fresh()
            self.add_node(PdgNode(fv, NodeKind.FORMAL_IN, "formal-in", True,
                                  proc.name, None, None, None, prm.loc))
            self.edge(entry, fv, EdgeKind.CONTROL_DEP)
            leaf = self.synth_var_leaf(prm.name, proc.name, None, prm.loc)
            self.edge(fv, leaf, EdgeKind.AST_CHILD)
            self.formal_in[proc.name].append(fv)
            entry_defs.append(Definition(prm.name, leaf, C.ENTRY, strong=True))
            if prm.by_ref:
                ov = self.fresh()
                self.add_node(PdgNode(ov, NodeKind.FORMAL_OUT, "formal-out", True,
                                      proc.name, None, None, None, prm.loc))
                self.edge(entry, ov, EdgeKind.CONTROL_DEP)
                oleaf = self.synth_var_leaf(prm.name, proc.name, None, prm.loc)
                self.edge(ov, oleaf, EdgeKind.AST_CHILD)
                self.formal_out[proc.name][i] = ov

        body = extra_body + proc.body
        infos: dict[int, _StmtInfo] = {}
        for s in A.statements(body):
            infos[s.nid] = self.build_stmt(s, proc.name)

        # control dependence
        cfg = C.build_cfg(body, proc.name)
        self.cfgs[proc.name] = cfg
        cd = C.control_dependence(cfg)
        for s in A.statements(body):
            controllers = cd.get(s.nid, [])
            if not controllers:
                controllers = [C.ENTRY]
            for ctl in controllers:
                src = entry if ctl == C.ENTRY else ctl
                self.edge(src, s.nid, EdgeKind.CONTROL_DEP)

        # execution-order chains between same-arm siblings
        def chain(stmts: list[A.Stmt]) -> None:
            for a, b in zip(stmts, stmts[1:]):
                self.edge(a.nid, b.nid, EdgeKind.EXEC_ORDER)

        chain(body)
        for s in A.statements(body):
            if isinstance(s, A.If):
                chain(s.then_body)
                chain(s.else_body)
            elif isinstance(s, A.While):
                chain(s.body)

        # data dependence from reaching definitions
        gen: dict[int, list[Definition]] = {C.ENTRY: entry_defs}
        for nid, info in infos.items():
            gen[nid] = info.defs
        IN = C.reaching_definitions(cfg, gen)
        for nid, info in infos.items():
            for var, leaf in info.uses:
                for d in sorted(IN[nid], key=lambda d: (d.leaf, d.site)):
                    if d.var == var:
                        self.edge(d.leaf, leaf, EdgeKind.DATA_DEP)
        # definitions of by-ref params flowing out at exit
        for i, ov in self.formal_out[proc.name].items():
            prm = proc.params[i]
            oleaf = next(e.dst for e in self.edges
                         if e.src == ov and e.kind == EdgeKind.AST_CHILD)
            for d in sorted(IN[C.EXIT], key=lambda d: (d.leaf, d.site)):
                if d.var == prm.name:
                    self.edge(d.leaf, oleaf, EdgeKind.DATA_DEP)

    # -- whole program ---------------------------------------------------------

    def link_calls(self) -> None:
        for stmt, actual_ins, actual_outs in self.calls:
            callee = stmt.name
            self.edge(stmt.nid, self.entry_of[callee], EdgeKind.CALL)
            fins = self.formal_in[callee]
            for av, fv in zip(actual_ins, fins):
                self.edge(av, fv, EdgeKind.PARAM_IN)
            for i, ov in actual_outs.items():
                self.edge(self.formal_out[callee][i], ov, EdgeKind.PARAM_OUT)

    def result(self) -> Pdg:
        return Pdg(self.nodes, self.edges, self.entry_of, self.program,
                   None, self.cfgs)


def build_pdg(program: A.Program, proc_name: str) -> Pdg:
    """Dependence graph of a single procedure (no interprocedural edges).

    Globals are initialized before `main` runs, so their declarations belong
    to main's graph."""
    b = _Builder(program)
    proc = program.proc(proc_name)
    extra = list(program.globals) if proc_name == "main" else []
    b.build_proc(proc, extra)
    return b.result()


def build_ipdg(program: A.Program) -> Pdg:
    """Whole-program dependence graph with call/param-in/param-out links."""
    b = _Builder(program)
    for proc in program.procs:
        extra = list(program.globals) if proc.name == "main" else []
        b.build_proc(proc, extra)
    b.link_calls()
    return b.result()


# --- meta node ---------------------------------------------------------------


def attach_meta_node(graph: Pdg) -> Pdg:
    """Add the singleton meta node with a link to every native node."""
    if graph.meta_id is not None:
        raise AlreadyAttachedError("graph already has a meta node")
    mid = max(graph.nodes) + 1
    graph.nodes[mid] = PdgNode(mid, NodeKind.META, "meta", False, "", None, None, None, None)
    for nid in list(graph.nodes):
        if nid != mid:
            graph.edges.append(PdgEdge(mid, nid, EdgeKind.META_LINK))
    graph.meta_id = mid
    return graph


def strip_meta_node(graph: Pdg) -> Pdg:
    """Remove the meta node and its links, restoring the original graph."""
    if graph.meta_id is None:
        raise NoMetaNodeError("graph has no meta node")
    mid = graph.meta_id
    del graph.nodes[mid]
    graph.edges = [e for e in graph.edges if e.src != mid and e.dst != mid]
    graph.meta_id = None
    return graph


# --- export -------------------------------------------------------------------


def export_json(graph: Pdg) -> dict:
    """Deterministic JSON-ready dict: nodes and edges sorted by id."""
    nodes = []
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        nodes.append({
            "id": n.nid,
            "kind": n.kind.value,
            "token": n.token,
            "stmt_root": n.stmt_root,
            "proc": n.proc,
            "ast": n.ast_nid,
            "stmt": n.stmt_nid,
            "var": n.var,
            "loc": [n.loc.line, n.loc.col] if n.loc else None,
        })
    edges = sorted(
        ({"src": e.src, "dst": e.dst, "kind": e.kind.value} for e in graph.edges),
        key=lambda d: (d["src"], d["dst"], d["kind"]),
    )
    return {"meta": graph.meta_id, "nodes": nodes, "edges": edges}


_DOT_SHAPE = {
    NodeKind.AST_INTERNAL: "box",
    NodeKind.AST_LEAF: "ellipse",
    NodeKind.ENTRY: "septagon",
    NodeKind.CALL_SITE: "hexagon",
    NodeKind.ACTUAL_IN: "trapezium",
    NodeKind.ACTUAL_OUT: "invtrapezium",
    NodeKind.FORMAL_IN: "parallelogram",
    NodeKind.FORMAL_OUT: "parallelogram",
    NodeKind.META: "doublecircle",
}

_DOT_STYLE = {
    EdgeKind.AST_CHILD: "solid",
    EdgeKind.CONTROL_DEP: "bold",
    EdgeKind.DATA_DEP: "dashed",
    EdgeKind.EXEC_ORDER: "dotted",
    EdgeKind.CALL: "bold",
    EdgeKind.PARAM_IN: "dashed",
    EdgeKind.PARAM_OUT: "dashed",
    EdgeKind.META_LINK: "dotted",
}


def to_dot(graph: Pdg) -> str:
    lines = ["digraph pdg {"]
    for nid in sorted(graph.nodes):
        n = graph.nodes[nid]
        label = f"{n.nid}:{n.token}"
        if n.var:
            label += f"({n.var})"
        lines.append(f'  n{nid} [label="{label}", shape={_DOT_SHAPE[n.kind]}];')
    for e in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.kind.value)):
        lines.append(
            f'  n{e.src} -> n{e.dst} [style={_DOT_STYLE[e.kind]}, label="{e.kind.value}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
