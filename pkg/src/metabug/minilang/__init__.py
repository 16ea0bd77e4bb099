"""MBL mini-language: AST, parser, printer."""

from .ast import (
    ARITH_OPS, BUILTINS, CMP_OPS, MAY_FAIL, TYPES,
    Assign, BinOp, BuiltinCall, BuiltinSig, CallStmt, Cmp, Expr, If, Index,
    IntLit, Loc, Node, NullLit, Param, ParseError, Procedure, Program,
    ResolutionError, Return, SpawnStmt, Stmt, StrLit, Var, VarDecl, While,
    children, proc_statements, statements, structural_equal, walk,
    walk_program,
)
from .parser import parse_program
from .printer import pretty_print, print_expr

__all__ = [
    "ARITH_OPS", "BUILTINS", "CMP_OPS", "MAY_FAIL", "TYPES",
    "Assign", "BinOp", "BuiltinCall", "BuiltinSig", "CallStmt", "Cmp", "Expr",
    "If", "Index", "IntLit", "Loc", "Node", "NullLit", "Param", "ParseError",
    "Procedure", "Program", "ResolutionError", "Return", "SpawnStmt", "Stmt",
    "StrLit", "Var", "VarDecl", "While",
    "children", "parse_program", "pretty_print", "print_expr",
    "proc_statements", "statements", "structural_equal", "walk",
    "walk_program",
]
