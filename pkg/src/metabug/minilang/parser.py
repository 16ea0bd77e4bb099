"""Recursive-descent parser and name resolution for MBL.

`parse_program` is the single entry point.  Node ids are handed out in parse
order starting from 0, which makes ids a pure function of the source text —
re-parsing a file always yields the same ids, so artifacts that name
statements by id (ground truth, slices, reports) stay valid across runs.
"""

from __future__ import annotations

from . import ast
from .ast import (
    Assign, BinOp, BuiltinCall, CallStmt, Cmp, If, Index, IntLit, Loc, NullLit,
    Param, ParseError, Procedure, Program, ResolutionError, Return, SpawnStmt,
    StrLit, Stmt, Var, VarDecl, While,
)
from .lexer import Token, tokenize


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.pos = 0
        self.next_id = 0
        self.src = src

    # -- token plumbing ------------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {t.text or t.kind!r}", t.line, t.col)
        return self.advance()

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def nid(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def loc(self, t: Token) -> Loc:
        return Loc(t.line, t.col)

    # -- grammar -------------------------------------------------------------

    def program(self) -> Program:
        t0 = self.peek()
        pid = self.nid()
        globals_: list[VarDecl] = []
        procs: list[Procedure] = []
        while not self.at("eof"):
            if self.at("kw", "var"):
                globals_.append(self.var_decl())
            elif self.at("kw", "proc"):
                procs.append(self.procedure())
            else:
                t = self.peek()
                raise ParseError(
                    f"expected 'proc' or 'var' at top level, found {t.text!r}", t.line, t.col
                )
        if not any(p.name == "main" for p in procs):
            raise ParseError("program has no 'main' procedure", t0.line, t0.col)
        return Program(pid, self.loc(t0), globals_, procs, source=self.src)

    def procedure(self) -> Procedure:
        t = self.expect("kw", "proc")
        nid = self.nid()
        name = self.expect("ident").text
        self.expect("sym", "(")
        params: list[Param] = []
        if not self.at("sym", ")"):
            while True:
                params.append(self.param())
                if self.at("sym", ","):
                    self.advance()
                else:
                    break
        self.expect("sym", ")")
        body = self.block()
        return Procedure(nid, self.loc(t), name, params, body)

    def param(self) -> Param:
        t = self.expect("ident")
        nid = self.nid()
        self.expect("sym", ":")
        by_ref = False
        if self.at("kw", "ref"):
            self.advance()
            by_ref = True
        ty = self.expect("ident")
        if ty.text not in ast.TYPES:
            raise ParseError(f"unknown type {ty.text!r}", ty.line, ty.col)
        return Param(t.text, ty.text, by_ref, nid, self.loc(t))

    def block(self) -> list[Stmt]:
        self.expect("sym", "{")
        body: list[Stmt] = []
        while not self.at("sym", "}"):
            body.append(self.statement())
        self.expect("sym", "}")
        return body

    def statement(self) -> Stmt:
        t = self.peek()
        if self.at("kw", "var"):
            return self.var_decl()
        if self.at("kw", "if"):
            return self.if_stmt()
        if self.at("kw", "while"):
            self.advance()
            nid = self.nid()
            self.expect("sym", "(")
            cond = self.expr()
            self.expect("sym", ")")
            body = self.block()
            return While(nid, self.loc(t), cond, body)
        if self.at("kw", "return"):
            self.advance()
            nid = self.nid()
            self.expect("sym", ";")
            return Return(nid, self.loc(t))
        if self.at("kw", "spawn"):
            self.advance()
            nid = self.nid()
            name = self.expect("ident").text
            args = self.call_args()
            self.expect("sym", ";")
            return SpawnStmt(nid, self.loc(t), name, args)
        if t.kind == "ident":
            # call statement or assignment; disambiguate on the next token
            nxt = self.toks[self.pos + 1]
            if nxt.kind == "sym" and nxt.text == "(":
                nid = self.nid()
                name = self.advance().text
                args = self.call_args()
                self.expect("sym", ";")
                return CallStmt(nid, self.loc(t), name, args)
            return self.assign()
        raise ParseError(f"expected a statement, found {t.text or t.kind!r}", t.line, t.col)

    def var_decl(self) -> VarDecl:
        t = self.expect("kw", "var")
        nid = self.nid()
        name_tok = self.expect("ident")
        target = Var(self.nid(), self.loc(name_tok), name_tok.text)
        self.expect("sym", ":=")
        value = self.expr()
        self.expect("sym", ";")
        return VarDecl(nid, self.loc(t), target, value)

    def if_stmt(self) -> If:
        t = self.expect("kw", "if")
        nid = self.nid()
        self.expect("sym", "(")
        cond = self.expr()
        self.expect("sym", ")")
        then_body = self.block()
        else_body: list[Stmt] = []
        if self.at("kw", "else"):
            self.advance()
            if self.at("kw", "if"):
                else_body = [self.if_stmt()]
            else:
                else_body = self.block()
        return If(nid, self.loc(t), cond, then_body, else_body)

    def assign(self) -> Assign:
        t = self.peek()
        nid = self.nid()
        target: Var | Index = self.lvalue()
        self.expect("sym", ":=")
        value = self.expr()
        self.expect("sym", ";")
        return Assign(nid, self.loc(t), target, value)

    def lvalue(self) -> Var | Index:
        t = self.expect("ident")
        var = Var(self.nid(), self.loc(t), t.text)
        if self.at("sym", "["):
            inid = self.nid()
            self.advance()
            idx = self.expr()
            self.expect("sym", "]")
            return Index(inid, self.loc(t), var, idx)
        return var

    def call_args(self) -> list[ast.Expr]:
        self.expect("sym", "(")
        args: list[ast.Expr] = []
        if not self.at("sym", ")"):
            while True:
                args.append(self.expr())
                if self.at("sym", ","):
                    self.advance()
                else:
                    break
        self.expect("sym", ")")
        return args

    # expression precedence: comparison < additive < multiplicative < atom
    def expr(self) -> ast.Expr:
        lhs = self.additive()
        t = self.peek()
        if t.kind == "sym" and t.text in ast.CMP_OPS:
            nid = self.nid()
            self.advance()
            rhs = self.additive()
            return Cmp(nid, self.loc(t), t.text, lhs, rhs)
        return lhs

    def additive(self) -> ast.Expr:
        lhs = self.multiplicative()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            t = self.advance()
            nid = self.nid()
            rhs = self.multiplicative()
            lhs = BinOp(nid, self.loc(t), t.text, lhs, rhs)
        return lhs

    def multiplicative(self) -> ast.Expr:
        lhs = self.atom()
        while self.peek().kind == "sym" and self.peek().text == "*":
            t = self.advance()
            nid = self.nid()
            rhs = self.atom()
            lhs = BinOp(nid, self.loc(t), "*", lhs, rhs)
        return lhs

    def atom(self) -> ast.Expr:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            return IntLit(self.nid(), self.loc(t), int(t.text))
        if t.kind == "string":
            self.advance()
            return StrLit(self.nid(), self.loc(t), t.text)
        if self.at("kw", "null"):
            self.advance()
            return NullLit(self.nid(), self.loc(t))
        if self.at("sym", "("):
            self.advance()
            e = self.expr()
            self.expect("sym", ")")
            return e
        if t.kind == "ident":
            nxt = self.toks[self.pos + 1]
            if nxt.kind == "sym" and nxt.text == "(":
                nid = self.nid()
                name = self.advance().text
                args = self.call_args()
                return BuiltinCall(nid, self.loc(t), name, args)
            var = Var(self.nid(), self.loc(t), t.text)
            self.advance()
            if self.at("sym", "["):
                inid = self.nid()
                self.advance()
                idx = self.expr()
                self.expect("sym", "]")
                return Index(inid, self.loc(t), var, idx)
            return var
        raise ParseError(f"expected an expression, found {t.text or t.kind!r}", t.line, t.col)


def _resolve(program: Program) -> None:
    """Name resolution.  Raises ResolutionError on the first violation."""
    proc_names: set[str] = set()
    for p in program.procs:
        if p.name in proc_names:
            raise ResolutionError(f"duplicate procedure name {p.name!r}")
        if p.name in ast.BUILTINS:
            raise ResolutionError(f"procedure {p.name!r} shadows a builtin")
        proc_names.add(p.name)

    global_names = [g.target.name for g in program.globals]
    seen_globals: set[str] = set()
    for g in program.globals:
        _check_expr(g.value, seen_globals, proc_names, program)
        if g.target.name in seen_globals:
            raise ResolutionError(f"duplicate global {g.target.name!r}")
        seen_globals.add(g.target.name)

    for p in program.procs:
        scope = set(global_names)
        seen_params: set[str] = set()
        for prm in p.params:
            if prm.name in seen_params:
                raise ResolutionError(
                    f"duplicate parameter {prm.name!r} in procedure {p.name!r}"
                )
            seen_params.add(prm.name)
            scope.add(prm.name)
        _check_body(p.body, scope, seen_params | set(), proc_names, program)


def _check_body(
    body: list[Stmt],
    scope: set[str],
    declared_here: set[str],
    procs: set[str],
    program: Program,
) -> None:
    for s in body:
        if isinstance(s, VarDecl):
            _check_expr(s.value, scope, procs, program)
            if s.target.name in declared_here:
                raise ResolutionError(f"duplicate declaration of {s.target.name!r}")
            declared_here.add(s.target.name)
            scope.add(s.target.name)
        elif isinstance(s, Assign):
            if isinstance(s.target, Index):
                if s.target.base.name not in scope:
                    raise ResolutionError(f"undefined variable {s.target.base.name!r}")
                _check_expr(s.target.index, scope, procs, program)
            elif s.target.name not in scope:
                raise ResolutionError(f"undefined variable {s.target.name!r}")
            _check_expr(s.value, scope, procs, program)
        elif isinstance(s, If):
            _check_expr(s.cond, scope, procs, program)
            _check_body(s.then_body, scope, declared_here, procs, program)
            _check_body(s.else_body, scope, declared_here, procs, program)
        elif isinstance(s, While):
            _check_expr(s.cond, scope, procs, program)
            _check_body(s.body, scope, declared_here, procs, program)
        elif isinstance(s, (CallStmt, SpawnStmt)):
            _check_call(s, scope, procs, program)
        elif isinstance(s, Return):
            pass
        else:  # pragma: no cover - parser produces no other statement kinds
            raise TypeError(type(s).__name__)


def _check_call(s: CallStmt | SpawnStmt, scope: set[str], procs: set[str], program: Program) -> None:
    is_spawn = isinstance(s, SpawnStmt)
    if s.name in procs:
        target = program.proc(s.name)
        if len(s.args) != len(target.params):
            raise ResolutionError(
                f"procedure {s.name!r} expects {len(target.params)} argument(s), got {len(s.args)}"
            )
        for arg, prm in zip(s.args, target.params):
            if prm.by_ref and not isinstance(arg, Var):
                raise ResolutionError(
                    f"by-reference parameter {prm.name!r} of {s.name!r} needs a plain variable argument"
                )
            _check_expr(arg, scope, procs, program)
        return
    if is_spawn:
        raise ResolutionError(f"spawn target {s.name!r} is not a declared procedure")
    if s.name in ast.BUILTINS:
        sig = ast.BUILTINS[s.name]
        if len(s.args) != sig.arity:
            raise ResolutionError(
                f"builtin {s.name!r} expects {sig.arity} argument(s), got {len(s.args)}"
            )
        for arg in s.args:
            _check_expr(arg, scope, procs, program)
        return
    raise ResolutionError(f"call to undefined procedure {s.name!r}")


def _check_expr(e: ast.Expr, scope: set[str], procs: set[str], program: Program) -> None:
    if isinstance(e, Var):
        if e.name not in scope:
            raise ResolutionError(f"undefined variable {e.name!r}")
    elif isinstance(e, Index):
        _check_expr(e.base, scope, procs, program)
        _check_expr(e.index, scope, procs, program)
    elif isinstance(e, (BinOp, Cmp)):
        _check_expr(e.lhs, scope, procs, program)
        _check_expr(e.rhs, scope, procs, program)
    elif isinstance(e, BuiltinCall):
        if e.name in procs:
            raise ResolutionError(
                f"procedure {e.name!r} cannot be used in an expression; call it as a statement"
            )
        if e.name not in ast.BUILTINS:
            raise ResolutionError(f"call to undefined builtin {e.name!r}")
        sig = ast.BUILTINS[e.name]
        if len(e.args) != sig.arity:
            raise ResolutionError(
                f"builtin {e.name!r} expects {sig.arity} argument(s), got {len(e.args)}"
            )
        for a in e.args:
            _check_expr(a, scope, procs, program)


def parse_program(src: str) -> Program:
    """Parse and resolve MBL source, returning the Program AST."""
    program = _Parser(src).program()
    _resolve(program)
    return program
