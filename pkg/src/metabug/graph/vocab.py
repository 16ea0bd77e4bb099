"""Fixed token vocabulary for dependence-graph nodes.

Graph nodes are labelled with tokens from a closed vocabulary: statement and
operator kinds, builtin names, literal kinds, the synthetic vertex kinds, and
64 identifier buckets.  Identifiers are bucketed by order of first occurrence
within a program (`id0` for the first distinct name seen, and so on), so any
consistent renaming of a program maps to the same token sequence.
"""

from __future__ import annotations

from ..minilang import ast as A

ID_BUCKETS = 64

_STRUCTURE = [
    "assign", "var-decl", "if", "while", "call", "spawn", "return", "index",
]
_OPS = [f"binop:{op}" for op in A.ARITH_OPS] + [f"cmp:{op}" for op in A.CMP_OPS]
_BUILTIN_TOKENS = [f"builtin:{name}" for name in A.BUILTINS]
_LITERALS = ["lit:int", "lit:str", "lit:null"]
_VERTICES = [
    "entry", "actual-in", "actual-out", "formal-in", "formal-out", "meta",
]
_IDS = [f"id{i}" for i in range(ID_BUCKETS)]

VOCAB: tuple[str, ...] = tuple(_STRUCTURE + _OPS + _BUILTIN_TOKENS + _LITERALS + _VERTICES + _IDS)

TOKEN_INDEX: dict[str, int] = {tok: i for i, tok in enumerate(VOCAB)}


class IdentBuckets:
    """Maps identifier names to `id<N>` tokens by first occurrence.

    Programs with more than 64 distinct names share the last bucket; the
    generated corpus never comes close to that.
    """

    def __init__(self) -> None:
        self._order: dict[str, int] = {}

    def token(self, name: str) -> str:
        if name not in self._order:
            self._order[name] = len(self._order)
        return f"id{min(self._order[name], ID_BUCKETS - 1)}"


def token_for_expr(e: A.Expr, idents: IdentBuckets) -> str:
    if isinstance(e, A.IntLit):
        return "lit:int"
    if isinstance(e, A.StrLit):
        return "lit:str"
    if isinstance(e, A.NullLit):
        return "lit:null"
    if isinstance(e, A.Var):
        return idents.token(e.name)
    if isinstance(e, A.Index):
        return "index"
    if isinstance(e, A.BinOp):
        return f"binop:{e.op}"
    if isinstance(e, A.Cmp):
        return f"cmp:{e.op}"
    if isinstance(e, A.BuiltinCall):
        return f"builtin:{e.name}"
    raise TypeError(type(e).__name__)


def token_for_stmt(s: A.Stmt) -> str:
    if isinstance(s, A.VarDecl):
        return "var-decl"
    if isinstance(s, A.Assign):
        return "assign"
    if isinstance(s, A.If):
        return "if"
    if isinstance(s, A.While):
        return "while"
    if isinstance(s, A.CallStmt):
        return f"builtin:{s.name}" if s.name in A.BUILTINS else "call"
    if isinstance(s, A.SpawnStmt):
        return "spawn"
    if isinstance(s, A.Return):
        return "return"
    raise TypeError(type(s).__name__)
