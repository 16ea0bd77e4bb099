"""AST node types for the MBL mini-language.

MBL is a tiny imperative language used as the analysis subject throughout
this package: procedures with by-value/by-reference parameters, integer and
string scalars, int arrays, file handles, plus `spawn` for launching a
procedure on a second thread.  There are no exceptions; instead the two
builtins that can fail at runtime (`open`, `parseInt`) induce an implicit
early-exit control path out of the enclosing procedure.

Every node carries a numeric id (`nid`) assigned by the parser in parse
order, so a given source text always produces the same ids.  Ids are unique
within one Program and are the coin of the realm for everything downstream:
dependence-graph vertices, slice criteria, ground-truth traces and reports
all refer to statements by node id.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Raised on malformed source; carries a 1-based line/column."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


class ResolutionError(Exception):
    """Raised when a name does not resolve (variable, procedure, builtin misuse)."""


# Builtin table.  `may_fail` builtins add an early-exit edge to the CFG of the
# enclosing procedure: `open` fails when the environment says so, `parseInt`
# fails on non-numeric content.
@dataclass(frozen=True)
class BuiltinSig:
    name: str
    arity: int
    may_fail: bool


BUILTINS: dict[str, BuiltinSig] = {
    "open": BuiltinSig("open", 1, True),
    "close": BuiltinSig("close", 1, False),
    "parseInt": BuiltinSig("parseInt", 1, True),
    "length": BuiltinSig("length", 1, False),
    "abs": BuiltinSig("abs", 1, False),
    "read_input": BuiltinSig("read_input", 1, False),
}

MAY_FAIL = frozenset(sig.name for sig in BUILTINS.values() if sig.may_fail)

TYPES = ("int", "string", "handle", "array")

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Loc:
    line: int
    col: int


@dataclass(eq=False)
class Node:
    nid: int
    loc: Loc


# --- expressions -----------------------------------------------------------


@dataclass(eq=False)
class Expr(Node):
    pass


@dataclass(eq=False)
class IntLit(Expr):
    value: int


@dataclass(eq=False)
class StrLit(Expr):
    value: str


@dataclass(eq=False)
class NullLit(Expr):
    pass


@dataclass(eq=False)
class Var(Expr):
    """A bare identifier.  Used both for reads and for assignment targets."""

    name: str


@dataclass(eq=False)
class Index(Expr):
    """`base[index]` where the base is always a plain variable."""

    base: Var
    index: Expr


@dataclass(eq=False)
class BinOp(Expr):
    op: str  # one of ARITH_OPS
    lhs: Expr
    rhs: Expr


@dataclass(eq=False)
class Cmp(Expr):
    op: str  # one of CMP_OPS
    lhs: Expr
    rhs: Expr


@dataclass(eq=False)
class BuiltinCall(Expr):
    name: str
    args: list[Expr]


# --- statements ------------------------------------------------------------


@dataclass(eq=False)
class Stmt(Node):
    pass


@dataclass(eq=False)
class VarDecl(Stmt):
    target: Var
    value: Expr


@dataclass(eq=False)
class Assign(Stmt):
    target: Var | Index
    value: Expr


@dataclass(eq=False)
class If(Stmt):
    cond: Expr
    then_body: list[Stmt]
    else_body: list[Stmt]  # empty when no else; a lone nested If for `else if`


@dataclass(eq=False)
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass(eq=False)
class CallStmt(Stmt):
    """Call of a declared procedure or a builtin in statement position."""

    name: str
    args: list[Expr]


@dataclass(eq=False)
class SpawnStmt(Stmt):
    """Launch a declared procedure on a new thread."""

    name: str
    args: list[Expr]


@dataclass(eq=False)
class Return(Stmt):
    pass


# --- top level --------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type: str  # one of TYPES
    by_ref: bool
    nid: int
    loc: Loc


@dataclass(eq=False)
class Procedure(Node):
    name: str
    params: list[Param]
    body: list[Stmt]


@dataclass(eq=False)
class Program(Node):
    globals: list[VarDecl]
    procs: list[Procedure]
    source: str = ""
    _index: dict[int, Node] = field(default_factory=dict, repr=False)

    def proc(self, name: str) -> Procedure:
        for p in self.procs:
            if p.name == name:
                return p
        raise KeyError(name)

    @property
    def main(self) -> Procedure:
        return self.proc("main")

    def node(self, nid: int) -> Node:
        """Look up any AST node (statement or expression) by id."""
        if not self._index:
            for n in walk_program(self):
                self._index[n.nid] = n
        return self._index[nid]


def children(node: Node) -> list[Node]:
    """Direct AST children, in source order (Param objects excluded)."""
    if isinstance(node, (IntLit, StrLit, NullLit, Var, Return)):
        return []
    if isinstance(node, Index):
        return [node.base, node.index]
    if isinstance(node, (BinOp, Cmp)):
        return [node.lhs, node.rhs]
    if isinstance(node, BuiltinCall):
        return list(node.args)
    if isinstance(node, VarDecl):
        return [node.target, node.value]
    if isinstance(node, Assign):
        return [node.target, node.value]
    if isinstance(node, If):
        return [node.cond, *node.then_body, *node.else_body]
    if isinstance(node, While):
        return [node.cond, *node.body]
    if isinstance(node, (CallStmt, SpawnStmt)):
        return list(node.args)
    if isinstance(node, Procedure):
        return list(node.body)
    if isinstance(node, Program):
        return [*node.globals, *node.procs]
    raise TypeError(f"unknown node {type(node).__name__}")


def walk(node: Node):
    """Yield `node` and all AST descendants, preorder."""
    yield node
    for c in children(node):
        yield from walk(c)


def walk_program(program: Program):
    yield program
    for g in program.globals:
        yield from walk(g)
    for p in program.procs:
        yield p
        for s in p.body:
            yield from walk(s)


def statements(body: list[Stmt]):
    """Yield every statement in `body`, including ones nested in branches."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from statements(s.then_body)
            yield from statements(s.else_body)
        elif isinstance(s, While):
            yield from statements(s.body)


def proc_statements(proc: Procedure):
    yield from statements(proc.body)


def structural_equal(a: Node, b: Node) -> bool:
    """Structural AST equality ignoring node ids and locations."""
    if type(a) is not type(b):
        return False
    scalar_fields = {
        IntLit: ("value",),
        StrLit: ("value",),
        Var: ("name",),
        BinOp: ("op",),
        Cmp: ("op",),
        BuiltinCall: ("name",),
        CallStmt: ("name",),
        SpawnStmt: ("name",),
        Procedure: ("name",),
    }
    for f in scalar_fields.get(type(a), ()):
        if getattr(a, f) != getattr(b, f):
            return False
    if isinstance(a, Procedure):
        pa = [(p.name, p.type, p.by_ref) for p in a.params]
        pb = [(p.name, p.type, p.by_ref) for p in b.params]
        if pa != pb:
            return False
    ca, cb = children(a), children(b)
    if len(ca) != len(cb):
        return False
    # `children` flattens If arms; compare arm lengths so the split matches.
    if isinstance(a, If) and (len(a.then_body), len(a.else_body)) != (
        len(b.then_body),
        len(b.else_body),
    ):
        return False
    return all(structural_equal(x, y) for x, y in zip(ca, cb))
