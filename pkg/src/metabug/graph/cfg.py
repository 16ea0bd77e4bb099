"""Per-procedure control-flow graphs, control dependence, reaching definitions.

The CFG is at statement granularity: nodes are statement node ids plus the
synthetic ENTRY/EXIT sentinels.  Statements that contain a may-fail builtin
call (`open`, `parseInt`) get an extra edge straight to EXIT — the implicit
early-exit path that stands in for exception flow.  ENTRY also carries an
edge to EXIT so that it plays the role of the outermost "branch" in the
control-dependence computation (Ferrante–Ottenstein–Warren on postdominators).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..minilang import ast as A

ENTRY = -1
EXIT = -2


@dataclass
class Cfg:
    proc: str
    nodes: list[int]  # statement nids plus ENTRY/EXIT
    succ: dict[int, list[int]] = field(default_factory=dict)
    pred: dict[int, list[int]] = field(default_factory=dict)
    # edges that exist *only* because of a may-fail early exit; an edge that
    # is also a normal fallthrough is not recorded here
    early: set[tuple[int, int]] = field(default_factory=set)

    def add_edge(self, u: int, v: int, early: bool = False) -> None:
        if v not in self.succ[u]:
            self.succ[u].append(v)
            self.pred[v].append(u)
            if early:
                self.early.add((u, v))
        elif not early:
            self.early.discard((u, v))

    def normal_succ(self, n: int) -> list[int]:
        return [v for v in self.succ[n] if (n, v) not in self.early]


def stmt_eval_exprs(stmt: A.Stmt) -> list[A.Expr]:
    """Expressions evaluated *at* this statement (guards, rhs, args, store
    targets), not the bodies of nested statements."""
    if isinstance(stmt, (A.VarDecl, A.Assign)):
        out: list[A.Expr] = [stmt.value]
        if isinstance(stmt, A.Assign) and isinstance(stmt.target, A.Index):
            out.append(stmt.target)
        return out
    if isinstance(stmt, (A.If, A.While)):
        return [stmt.cond]
    if isinstance(stmt, (A.CallStmt, A.SpawnStmt)):
        return list(stmt.args)
    return []


def _contains_may_fail(exprs: list[A.Expr]) -> bool:
    for e in exprs:
        for n in A.walk(e):
            if isinstance(n, A.BuiltinCall) and n.name in A.MAY_FAIL:
                return True
    return False


def build_cfg(body: list[A.Stmt], proc: str) -> Cfg:
    """CFG over the statements of `body` (nested statements included)."""
    nodes = [ENTRY, EXIT] + [s.nid for s in A.statements(body)]
    cfg = Cfg(proc, nodes)
    for n in nodes:
        cfg.succ[n] = []
        cfg.pred[n] = []

    def wire(stmts: list[A.Stmt], after: int) -> int:
        """Wire `stmts` in sequence, falling through to `after`.
        Returns the entry point of the sequence."""
        nxt = after
        for s in reversed(stmts):
            nxt = wire_stmt(s, nxt)
        return nxt

    def wire_stmt(s: A.Stmt, after: int) -> int:
        if isinstance(s, A.If):
            then_in = wire(s.then_body, after)
            else_in = wire(s.else_body, after) if s.else_body else after
            cfg.add_edge(s.nid, then_in)
            cfg.add_edge(s.nid, else_in)
        elif isinstance(s, A.While):
            body_in = wire(s.body, s.nid)  # back edge to the guard
            cfg.add_edge(s.nid, body_in)
            cfg.add_edge(s.nid, after)
        elif isinstance(s, A.Return):
            cfg.add_edge(s.nid, EXIT)
            return s.nid
        else:
            cfg.add_edge(s.nid, after)
        if _contains_may_fail(stmt_eval_exprs(s)):
            cfg.add_edge(s.nid, EXIT, early=True)
        return s.nid

    first = wire(body, EXIT)
    cfg.add_edge(ENTRY, first)
    cfg.add_edge(ENTRY, EXIT)  # pseudo-edge so ENTRY acts as the outer branch
    return cfg


# --- postdominators and control dependence ---------------------------------


def postdominators(cfg: Cfg) -> dict[int, set[int]]:
    """Classic iterative postdominator sets: pdom(n) for every CFG node."""
    nodes = list(cfg.nodes)
    full = set(nodes)
    pdom: dict[int, set[int]] = {n: ({n} if n == EXIT else set(full)) for n in nodes}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            if n == EXIT:
                continue
            succs = cfg.succ[n]
            if not succs:
                new = {n}
            else:
                new = set(full)
                for s in succs:
                    new &= pdom[s]
                new |= {n}
            if new != pdom[n]:
                pdom[n] = new
                changed = True
    return pdom


def immediate_postdominators(cfg: Cfg) -> dict[int, int | None]:
    pdom = postdominators(cfg)
    ipdom: dict[int, int | None] = {}
    for n in cfg.nodes:
        if n == EXIT:
            ipdom[n] = None
            continue
        strict = pdom[n] - {n}
        ip = None
        for c in strict:
            # the immediate postdominator is the strict postdominator that
            # every other strict postdominator also postdominates
            if all(o == c or o in pdom[c] for o in strict):
                ip = c
                break
        ipdom[n] = ip
    return ipdom


def control_dependence(cfg: Cfg) -> dict[int, list[int]]:
    """Map statement nid -> list of controlling nids (branch stmts or ENTRY).

    Standard FOW construction: for each edge u->v where v does not
    postdominate u, every node on the postdominator-tree path from v up to
    (but excluding) ipdom(u) is control dependent on u.
    """
    pdom = postdominators(cfg)
    ipdom = immediate_postdominators(cfg)
    cd: dict[int, list[int]] = {n: [] for n in cfg.nodes}
    for u in cfg.nodes:
        for v in cfg.succ[u]:
            if v in pdom[u]:
                continue  # v postdominates u: not a decision edge
            runner: int | None = v
            stop = ipdom[u]
            while runner is not None and runner != stop:
                if runner not in (ENTRY, EXIT) and u not in cd[runner]:
                    cd[runner].append(u)
                runner = ipdom[runner]
    return cd


# --- reaching definitions ----------------------------------------------------


@dataclass(frozen=True)
class Definition:
    var: str
    leaf: int  # PDG leaf node id carrying the definition
    site: int  # CFG node (statement nid or ENTRY)
    strong: bool  # strong defs kill earlier defs of the same variable


def reaching_definitions(
    cfg: Cfg,
    gen: dict[int, list[Definition]],
) -> dict[int, set[Definition]]:
    """IN sets of a forward may-analysis over `cfg`.

    `gen` maps CFG node -> definitions generated there. A *strong* definition
    kills every other definition of the same variable; weak definitions
    (array-element stores, by-ref call effects) only add.
    """
    IN: dict[int, set[Definition]] = {n: set() for n in cfg.nodes}
    OUT: dict[int, set[Definition]] = {n: set() for n in cfg.nodes}
    order = list(cfg.nodes)
    changed = True
    while changed:
        changed = False
        for n in order:
            new_in: set[Definition] = set()
            for p in cfg.pred[n]:
                new_in |= OUT[p]
            gens = gen.get(n, [])
            killed_vars = {d.var for d in gens if d.strong}
            new_out = {d for d in new_in if d.var not in killed_vars} | set(gens)
            if new_in != IN[n] or new_out != OUT[n]:
                IN[n], OUT[n] = new_in, new_out
                changed = True
    return IN


def reaches(cfg: Cfg, src: int, dst: int, removed: frozenset[int] = frozenset()) -> bool:
    """Plain CFG reachability from `src` to `dst`, skipping `removed` nodes.

    Used by collectors: feasibility is deliberately ignored, and removing the
    `close` statements turns "path avoiding close" into plain reachability
    (loops need no special casing)."""
    if src in removed:
        return False
    seen = {src}
    stack = [src]
    while stack:
        n = stack.pop()
        if n == dst:
            return True
        for s in cfg.succ[n]:
            if s not in seen and s not in removed:
                seen.add(s)
                stack.append(s)
    return False
