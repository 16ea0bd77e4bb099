"""Under-constrained symbolic execution of branch-decided paths.

A path through a slice is pinned down by a decision map: every ``if``
picks an arm ("then"/"else") and every loop runs exactly once ("enter")
or not at all ("skip").  Walking the decided path yields the executed
statements plus a conjunction of linear constraints over the program's
unknowns -- input values, input lengths, null flags.  Statements that
must *survive* (a successful parse, an in-bounds index, a non-null
dereference) contribute their success conditions; the bug point
contributes the failure condition of its own kind instead, and the walk
stops there.

The model is deliberately weaker than real execution: anything outside
the linear fragment is dropped and logged, so an infeasible verdict is
trustworthy while a feasible one is optimistic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..collectors import TestSlice
from ..minilang import ast as A
from ..minilang.printer import print_expr
from .linsolve import (
    Constraint, LinExpr, UnsupportedConstraint, check_feasible, eq, le,
    render_conjunction,
)

DECISION_ARMS = {"then", "else", "enter", "skip"}


@dataclass
class PathResult:
    """Everything the walk learned about one decided path."""

    statements: tuple[int, ...]          # executed statement nids, in order
    constraints: list[Constraint]        # survival conditions along the path
    variants: list[list[Constraint]]     # alternative bug-trigger conjunctions
    unsupported: list[str]               # constructs outside the linear fragment
    reached_bug: bool

    def render(self, variant: int = 0) -> str:
        atoms = self.constraints + (
            self.variants[variant] if self.variants else []
        )
        # bookkeeping atoms (symbol ranges and the like) carry no note and
        # would only bury the story
        return render_conjunction([c for c in atoms if c.note])


class _Val:
    """Symbolic view of one runtime value.

    ``num`` is the value as a linear integer form (None when unknown or
    not an integer), ``length`` the string/array length, ``null`` a
    0/1-valued form (constant 0 means known non-null).  Shared between
    variables bound to the same value, so views attached lazily -- a
    fresh length symbol, say -- stay consistent across uses."""

    __slots__ = ("num", "length", "null", "nonlinear")

    def __init__(self, num: LinExpr | None = None,
                 length: LinExpr | None = None,
                 null: LinExpr | None = None,
                 nonlinear: bool = False):
        self.num = num
        self.length = length
        self.null = null if null is not None else LinExpr.const_of(0)
        self.nonlinear = nonlinear


class _State:
    """Walk-global bookkeeping shared by every procedure on the path."""

    def __init__(self, slc: TestSlice):
        self.slice = slc
        self.program = slc.program
        self.kind = slc.bug_kind
        self.bug_point = slc.bug_point
        self.trigger_node = slc.key[1] if slc.bug_kind in ("AIO", "NFE") else None
        self.trigger_vars = slc.criterion.variables
        self.inputs: dict[str, _Val] = {}
        self.constraints: list[Constraint] = []
        self.variants: list[list[Constraint]] = []
        self.unsupported: list[str] = []
        self.statements: list[int] = []
        self.at_trigger = False
        self.fired = False
        self.reached_bug = False
        self.spawn_env: dict[str, _Val] | None = None
        self.spawn_args: list[_Val] | None = None
        self.race_spawn = slc.integral[0] if slc.bug_kind == "RACE" else None
        self._fresh = itertools.count()

    # -- symbol helpers ------------------------------------------------

    def fresh_int(self, tag: str) -> LinExpr:
        return LinExpr.sym(f"{tag}.{next(self._fresh)}")

    def fresh_len(self, tag: str) -> LinExpr:
        sym = LinExpr.sym(f"len.{tag}")
        self.constraints.append(le(-sym))
        return sym

    def fresh_bit(self, tag: str) -> LinExpr:
        sym = LinExpr.sym(f"null.{tag}")
        self.constraints.append(le(-sym))
        self.constraints.append(le(sym.shifted(-1)))
        return sym

    def unknown(self, tag: str) -> _Val:
        """A value of wholly unknown provenance (havoc, parameters)."""
        return _Val(num=self.fresh_int(f"val.{tag}"),
                    null=self.fresh_bit(tag))

    def input_val(self, key: str) -> _Val:
        if key not in self.inputs:
            self.inputs[key] = _Val(
                num=LinExpr.sym(f"in.{key}"),
                length=self.fresh_len(f"in.{key}"),
                null=self.fresh_bit(f"in.{key}"),
            )
        return self.inputs[key]

    def emit(self, c: Constraint) -> None:
        if not self.fired:
            self.constraints.append(c)

    def give_up(self, what: str) -> None:
        if what not in self.unsupported:
            self.unsupported.append(what)


def _num_of(st: _State, v: _Val, src: A.Expr) -> LinExpr:
    """The integer view of a value, for use inside a constraint."""
    if v.nonlinear:
        raise UnsupportedConstraint(print_expr(src))
    if v.num is None:
        v.num = st.fresh_int("val")
    return v.num


def _length_of(st: _State, v: _Val, tag: str) -> LinExpr:
    if v.length is None:
        v.length = st.fresh_len(f"{tag}.{next(st._fresh)}")
    return v.length


# -- dereference / site conditions -------------------------------------


def _deref(st: _State, base: A.Var, v: _Val) -> bool:
    """Null-check condition for reading through ``base``.

    Returns True when this dereference is the slice's bug trigger, in
    which case the null *failure* was recorded as the trigger variant."""
    if st.fired:
        return False
    name = base.name
    if (st.at_trigger and st.kind == "NPD"
            and st.trigger_vars and name == st.trigger_vars[0]):
        st.variants.append([eq(v.null.shifted(-1), note=f"{name} == null")])
        st.fired = True
        return True
    st.emit(eq(v.null, note=f"{name} != null"))
    return False


def _index_site(st: _State, node: A.Index, base_v: _Val, idx_v: _Val) -> None:
    """Bounds conditions for one a[i] occurrence."""
    if _deref(st, node.base, base_v) or st.fired:
        return
    arr, idx_src = node.base.name, print_expr(node.index)
    if (st.at_trigger and st.kind == "AIO" and node.nid == st.trigger_node):
        st.fired = True
        try:
            idx = _num_of(st, idx_v, node.index)
        except UnsupportedConstraint as ex:
            st.give_up(f"index expression {ex}")
            st.variants.append([])
            return
        length = _length_of(st, base_v, arr)
        st.variants.append(
            [le(length - idx, note=f"{idx_src} >= length({arr})")])
        st.variants.append(
            [le(idx.shifted(1), note=f"{idx_src} < 0")])
        return
    try:
        idx = _num_of(st, idx_v, node.index)
    except UnsupportedConstraint as ex:
        st.give_up(f"index expression {ex}")
        return
    length = _length_of(st, base_v, arr)
    st.emit(le(-idx, note=f"0 <= {idx_src}"))
    st.emit(le((idx - length).shifted(1), note=f"{idx_src} < length({arr})"))


def _parse_site(st: _State, node: A.BuiltinCall, arg_v: _Val) -> _Val:
    src = print_expr(node.args[0])
    length = _length_of(st, arg_v, "str")
    if st.at_trigger and st.kind == "NFE" and node.args[0].nid == st.trigger_node:
        st.variants.append([eq(length, note=f"length({src}) == 0")])
        st.fired = True
    else:
        st.emit(le((-length).shifted(1),
                   note=f"parseInt({src}) succeeds: length({src}) >= 1"))
    return _Val(num=st.fresh_int("int"))


def _open_site(st: _State, src: str) -> _Val:
    if st.at_trigger and st.kind == "LEAK":
        # a leak needs the open itself to go through; the "never closed"
        # half lives in the path shape, not in the data constraints
        st.variants.append(
            [eq(LinExpr.const_of(0), note=f"open({src}) succeeds")])
        st.fired = True
    else:
        st.emit(eq(LinExpr.const_of(0), note=f"open({src}) succeeds"))
    return _Val()


# -- expression evaluation ----------------------------------------------


def _eval(st: _State, env: dict[str, _Val], e: A.Expr) -> _Val:
    if isinstance(e, A.IntLit):
        return _Val(num=LinExpr.const_of(e.value))
    if isinstance(e, A.StrLit):
        return _Val(length=LinExpr.const_of(len(e.value)))
    if isinstance(e, A.NullLit):
        return _Val(null=LinExpr.const_of(1))
    if isinstance(e, A.Var):
        if e.name not in env:
            env[e.name] = st.unknown(e.name)
        return env[e.name]
    if isinstance(e, A.Index):
        base_v = _eval(st, env, e.base)
        idx_v = _eval(st, env, e.index)
        _index_site(st, e, base_v, idx_v)
        return _Val(num=st.fresh_int("elem"))
    if isinstance(e, A.BinOp):
        lv = _eval(st, env, e.lhs)
        rv = _eval(st, env, e.rhs)
        if lv.nonlinear or rv.nonlinear:
            return _Val(nonlinear=True)
        ln, rn = lv.num, rv.num
        if ln is None or rn is None:
            return _Val(num=st.fresh_int("val"))
        if e.op == "+":
            return _Val(num=ln + rn)
        if e.op == "-":
            return _Val(num=ln - rn)
        # product: linear only when one side is constant
        if ln.is_const:
            return _Val(num=rn.scaled(ln.const))
        if rn.is_const:
            return _Val(num=ln.scaled(rn.const))
        return _Val(nonlinear=True)
    if isinstance(e, A.BuiltinCall):
        if e.name == "read_input":
            key = e.args[0]
            if isinstance(key, A.StrLit):
                return st.input_val(key.value)
            return st.unknown("input")
        if e.name == "length":
            v = _eval(st, env, e.args[0])
            if isinstance(e.args[0], A.Var):
                if _deref(st, e.args[0], v):
                    return _Val(num=st.fresh_int("len"))
            return _Val(num=_length_of(st, v, print_expr(e.args[0])))
        if e.name == "abs":
            v = _eval(st, env, e.args[0])
            t = st.fresh_int("abs")
            st.emit(le(-t))
            if v.num is not None and not v.nonlinear:
                st.emit(le(v.num - t))
                st.emit(le((-v.num) - t))
            return _Val(num=t)
        if e.name == "parseInt":
            v = _eval(st, env, e.args[0])
            return _parse_site(st, e, v)
        if e.name == "open":
            _eval(st, env, e.args[0])
            return _open_site(st, print_expr(e.args[0]))
        if e.name == "close":
            v = _eval(st, env, e.args[0])
            if isinstance(e.args[0], A.Var):
                _deref(st, e.args[0], v)
            return _Val()
        raise AssertionError(f"unhandled builtin {e.name}")
    if isinstance(e, A.Cmp):
        # comparisons produce no integer value; they only matter as guards
        _eval(st, env, e.lhs)
        _eval(st, env, e.rhs)
        return _Val()
    raise AssertionError(type(e).__name__)


_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def _guard(st: _State, env: dict[str, _Val], cond: A.Expr, truth: bool) -> None:
    """Record the condition under which ``cond`` evaluates to ``truth``."""
    if not isinstance(cond, A.Cmp):
        _eval(st, env, cond)
        st.give_up(f"guard {print_expr(cond)}")
        return
    lv = _eval(st, env, cond.lhs)
    rv = _eval(st, env, cond.rhs)
    if st.fired:
        return
    op = cond.op if truth else _FLIP[cond.op]
    note = print_expr(cond) if truth else f"not ({print_expr(cond)})"
    lhs_null = isinstance(cond.lhs, A.NullLit)
    rhs_null = isinstance(cond.rhs, A.NullLit)
    if lhs_null or rhs_null:
        if op not in ("==", "!="):
            st.give_up(f"guard {note}")
            return
        flag = (rv if lhs_null else lv).null
        want_null = op == "=="
        st.emit(eq(flag.shifted(-1) if want_null else flag, note=note))
        return
    try:
        l = _num_of(st, lv, cond.lhs)
        r = _num_of(st, rv, cond.rhs)
    except UnsupportedConstraint as ex:
        st.give_up(f"nonlinear guard term {ex}")
        return
    d = l - r
    if op == "<":
        st.emit(le(d.shifted(1), note=note))
    elif op == "<=":
        st.emit(le(d, note=note))
    elif op == ">":
        st.emit(le((-d).shifted(1), note=note))
    elif op == ">=":
        st.emit(le(-d, note=note))
    elif op == "==":
        st.emit(eq(d, note=note))
    else:  # != holds on two disjoint half-lines; not a conjunction
        st.give_up(f"guard {note}")


# -- statement walk -------------------------------------------------------


def _havoc_refs(st: _State, env: dict[str, _Val], args: list[A.Expr],
                proc_name: str) -> None:
    """After an un-modelled call, by-ref arguments hold unknown values."""
    proc = next((p for p in st.program.procs if p.name == proc_name), None)
    if proc is None:
        return
    for prm, arg in zip(proc.params, args):
        if prm.by_ref and isinstance(arg, A.Var):
            env[arg.name] = st.unknown(arg.name)


def _at_bug(st: _State, s: A.Stmt) -> bool:
    """Bug-point bookkeeping after a statement's own effects ran."""
    st.at_trigger = False
    if s.nid != st.bug_point:
        return False
    st.reached_bug = True
    if st.kind == "RACE" and not st.variants:
        st.variants.append([])
    return True


def _walk_stmt(st: _State, env: dict[str, _Val], s: A.Stmt,
               decisions: dict[int, str]) -> bool:
    """Execute one statement; False stops the enclosing walk."""
    st.statements.append(s.nid)
    st.at_trigger = s.nid == st.bug_point
    if isinstance(s, (A.VarDecl, A.Assign)):
        v = _eval(st, env, s.value)
        if isinstance(s.target, A.Var):
            env[s.target.name] = v
        else:
            base_v = _eval(st, env, s.target.base)
            idx_v = _eval(st, env, s.target.index)
            _index_site(st, s.target, base_v, idx_v)
    elif isinstance(s, A.If):
        arm = decisions[s.nid]
        _guard(st, env, s.cond, arm == "then")
        if _at_bug(st, s):  # a bug in the guard stops before either arm
            return False
        body = s.then_body if arm == "then" else s.else_body
        return _walk_body(st, env, body, decisions)
    elif isinstance(s, A.While):
        arm = decisions[s.nid]
        if arm == "enter":
            _guard(st, env, s.cond, True)
            if _at_bug(st, s):
                return False
            if not _walk_body(st, env, s.body, decisions):
                return False
            # one unrolling: the loop is left right after, under the
            # guard evaluated against the updated state
            _guard(st, env, s.cond, False)
            return True
        _guard(st, env, s.cond, False)
    elif isinstance(s, A.CallStmt):
        if s.name in A.BUILTINS:
            call = A.BuiltinCall(s.nid, s.loc, s.name, s.args)
            _eval(st, env, call)
        else:
            for a in s.args:
                _eval(st, env, a)
            _havoc_refs(st, env, s.args, s.name)
    elif isinstance(s, A.SpawnStmt):
        arg_vals = [_eval(st, env, a) for a in s.args]
        if s.nid == st.race_spawn:
            globals_ = {g.target.name for g in st.program.globals}
            st.spawn_env = {n: v for n, v in env.items() if n in globals_}
            st.spawn_args = arg_vals
        else:
            _havoc_refs(st, env, s.args, s.name)
    elif isinstance(s, A.Return):
        _at_bug(st, s)
        return False
    else:
        raise AssertionError(type(s).__name__)
    return not _at_bug(st, s)


def _walk_body(st: _State, env: dict[str, _Val], body: list[A.Stmt],
               decisions: dict[int, str]) -> bool:
    for s in body:
        if not _walk_stmt(st, env, s, decisions):
            return False
    return True


def _proc_named(program: A.Program, name: str) -> A.Procedure:
    for p in program.procs:
        if p.name == name:
            return p
    raise KeyError(name)


def proc_of_stmt(program: A.Program, nid: int) -> str:
    """Name of the procedure owning a statement; globals belong to main."""
    for g in program.globals:
        if g.nid == nid:
            return "main"
    for p in program.procs:
        if any(s.nid == nid for s in A.proc_statements(p)):
            return p.name
    raise KeyError(nid)


def _seed_env(st: _State, proc: A.Procedure) -> dict[str, _Val]:
    env = {prm.name: st.unknown(f"{proc.name}.{prm.name}") for prm in proc.params}
    if proc.name != "main":
        for g in st.program.globals:
            env.setdefault(g.target.name, st.unknown(g.target.name))
    return env


def _walk_proc(st: _State, name: str, decisions: dict[int, str],
               env: dict[str, _Val] | None = None) -> list[int]:
    proc = _proc_named(st.program, name)
    if env is None:
        env = _seed_env(st, proc)
    start = len(st.statements)
    if name == "main":
        if not _walk_body(st, env, list(st.program.globals), decisions):
            return st.statements[start:]
    _walk_body(st, env, proc.body, decisions)
    return st.statements[start:]


def _reads_shared(stmt: A.Stmt, variable: str) -> bool:
    cond = getattr(stmt, "cond", None)
    if cond is None:
        return False
    return any(isinstance(n, A.Var) and n.name == variable
               for n in A.walk(cond))


def symexec(slc: TestSlice, decisions: dict[int, str]) -> PathResult:
    """Walk the decided path through a slice and gather its constraints.

    For concurrent (RACE) slices both the spawning and the spawned
    procedure are walked and their constraints conjoined; the reported
    statement order splices the spawned procedure's steps in after the
    guard that reads the shared variable, where the interfering write
    would land.
    """
    st = _State(slc)
    if slc.bug_kind == "RACE" and slc.finding is not None:
        spawner, spawned = slc.finding.procs
        main_seq = _walk_proc(st, spawner, decisions)
        callee_env = None
        if st.spawn_args is not None:
            callee = _proc_named(st.program, spawned)
            callee_env = dict(st.spawn_env or {})
            for prm, v in zip(callee.params, st.spawn_args):
                callee_env[prm.name] = v
        st.statements = []
        callee_seq = _walk_proc(st, spawned, decisions, env=callee_env)
        # splice the spawned procedure in where the interfering write
        # lands: after the first guard past the spawn that reads the
        # shared variable, or straight after the spawn itself
        cut = main_seq.index(st.race_spawn) if st.race_spawn in main_seq \
            else len(main_seq) - 1
        for i in range(cut + 1, len(main_seq)):
            if _reads_shared(_stmt_by_nid(slc.program, main_seq[i]),
                             slc.finding.variable):
                cut = i
                break
        st.statements = main_seq[:cut + 1] + callee_seq
    else:
        _walk_proc(st, proc_of_stmt(slc.program, slc.bug_point), decisions)
    if not st.variants:
        st.variants.append([])
    return PathResult(
        statements=tuple(st.statements),
        constraints=st.constraints,
        variants=st.variants,
        unsupported=st.unsupported,
        reached_bug=st.reached_bug,
    )


def _stmt_by_nid(program: A.Program, nid: int) -> A.Stmt:
    for g in program.globals:
        if g.nid == nid:
            return g
    for p in program.procs:
        for s in A.proc_statements(p):
            if s.nid == nid:
                return s
    raise KeyError(nid)


def feasibility(slc: TestSlice, decisions: dict[int, str]) -> tuple[bool, str, PathResult]:
    """Decide one decided path; returns (feasible, rendered formula, walk).

    Paths containing constructs outside the linear fragment are treated
    as feasible -- dropping an atom can only grow the solution set, and
    the checker refuses to guess."""
    pr = symexec(slc, decisions)
    for i, extra in enumerate(pr.variants):
        if check_feasible(pr.constraints + extra).sat:
            return True, pr.render(i), pr
    if pr.unsupported:
        return True, pr.render(0), pr
    return False, pr.render(0), pr
