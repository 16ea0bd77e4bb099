"""Canonical pretty-printer for MBL ASTs.

The printer emits the canonical surface form: four-space indentation, one
statement per line, parentheses only where precedence demands them.  Parsing
the printed text reproduces the AST structurally (node ids differ, since ids
are assigned in parse order of the new text).
"""

from __future__ import annotations

from .ast import (
    Assign, BinOp, BuiltinCall, CallStmt, Cmp, Expr, If, Index, IntLit,
    NullLit, Procedure, Program, Return, SpawnStmt, Stmt, StrLit, Var,
    VarDecl, While,
)

_IND = "    "


def print_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, StrLit):
        return f'"{e.value}"'
    if isinstance(e, NullLit):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Index):
        return f"{e.base.name}[{print_expr(e.index)}]"
    if isinstance(e, BinOp):
        lhs = print_expr(e.lhs)
        rhs = print_expr(e.rhs)
        if isinstance(e.lhs, Cmp):
            lhs = f"({lhs})"
        if isinstance(e.rhs, (BinOp, Cmp)):
            rhs = f"({rhs})"
        if e.op == "*" and isinstance(e.lhs, BinOp) and e.lhs.op in ("+", "-"):
            lhs = f"({lhs})"
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, Cmp):
        lhs = print_expr(e.lhs)
        rhs = print_expr(e.rhs)
        if isinstance(e.lhs, Cmp):
            lhs = f"({lhs})"
        if isinstance(e.rhs, Cmp):
            rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}"
    if isinstance(e, BuiltinCall):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"{e.name}({args})"
    raise TypeError(type(e).__name__)


def _print_stmt(s: Stmt, depth: int, out: list[str],
                lines: dict[int, int] | None = None) -> None:
    pad = _IND * depth
    if lines is not None:
        lines[s.nid] = len(out) + 1  # 1-based line of the statement's first line
    if isinstance(s, VarDecl):
        out.append(f"{pad}var {s.target.name} := {print_expr(s.value)};")
    elif isinstance(s, Assign):
        out.append(f"{pad}{print_expr(s.target)} := {print_expr(s.value)};")
    elif isinstance(s, If):
        out.append(f"{pad}if ({print_expr(s.cond)}) {{")
        for c in s.then_body:
            _print_stmt(c, depth + 1, out, lines)
        cur = s
        # else-if chains share one line per link
        while len(cur.else_body) == 1 and isinstance(cur.else_body[0], If):
            cur = cur.else_body[0]
            if lines is not None:
                lines[cur.nid] = len(out) + 1
            out.append(f"{pad}}} else if ({print_expr(cur.cond)}) {{")
            for c in cur.then_body:
                _print_stmt(c, depth + 1, out, lines)
        if cur.else_body:
            out.append(f"{pad}}} else {{")
            for c in cur.else_body:
                _print_stmt(c, depth + 1, out, lines)
        out.append(f"{pad}}}")
    elif isinstance(s, While):
        out.append(f"{pad}while ({print_expr(s.cond)}) {{")
        for c in s.body:
            _print_stmt(c, depth + 1, out, lines)
        out.append(f"{pad}}}")
    elif isinstance(s, CallStmt):
        args = ", ".join(print_expr(a) for a in s.args)
        out.append(f"{pad}{s.name}({args});")
    elif isinstance(s, SpawnStmt):
        args = ", ".join(print_expr(a) for a in s.args)
        out.append(f"{pad}spawn {s.name}({args});")
    elif isinstance(s, Return):
        out.append(f"{pad}return;")
    else:
        raise TypeError(type(s).__name__)


def _print_proc(p: Procedure, out: list[str],
                lines: dict[int, int] | None = None) -> None:
    params = ", ".join(
        f"{prm.name}: {'ref ' if prm.by_ref else ''}{prm.type}" for prm in p.params
    )
    out.append(f"proc {p.name}({params}) {{")
    for s in p.body:
        _print_stmt(s, 1, out, lines)
    out.append("}")


def pretty_print(program: Program) -> str:
    """Render a Program back to canonical MBL source."""
    out: list[str] = []
    for g in program.globals:
        _print_stmt(g, 0, out)
    if program.globals:
        out.append("")
    for i, p in enumerate(program.procs):
        if i:
            out.append("")
        _print_proc(p, out)
    return "\n".join(out) + "\n"


def pretty_print_with_lines(program: Program) -> tuple[str, dict[int, int]]:
    """Like pretty_print, but also map each statement nid to its 1-based line.

    For an else-if chain the inner If maps to the shared ``} else if`` line.
    """
    out: list[str] = []
    lines: dict[int, int] = {}
    for g in program.globals:
        _print_stmt(g, 0, out, lines)
    if program.globals:
        out.append("")
    for i, p in enumerate(program.procs):
        if i:
            out.append("")
        _print_proc(p, out, lines)
    return "\n".join(out) + "\n", lines
