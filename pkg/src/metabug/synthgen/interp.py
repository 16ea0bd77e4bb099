"""Concrete MBL interpreter with a deterministic thread scheduler.

Serves as the ground-truth oracle for the synthetic corpus: every generated
buggy program must reproduce its declared outcome here, and every correct
program must survive a randomized input battery.

Runtime model
-------------
* Values are ints, strings, int arrays (Python lists), file handles, or null
  (`None`).  Variables live in cells; a by-reference parameter aliases the
  caller's cell, which is how spawned threads share state.
* `open` fails exactly when its call-expression node id is listed in the
  input's `failures`; a failed `open` exits the enclosing procedure early
  (the no-exceptions stand-in for a caught error).  `parseInt` fails on
  non-numeric content and aborts the run — the unhandled-error outcome.
* Null is strict: indexing, arithmetic, ordered comparison, `length`, `abs`,
  `close` and `parseInt` all fault on a null operand.
* Threads are cooperatively scheduled one statement at a time; an explicit
  schedule (a sequence of thread ids) pins the interleaving, after which the
  lowest-id runnable thread goes.  Entering a guarded region opens a
  "window" over the cells the guard read; a write to such a cell by another
  thread while the window is open is the race-window outcome — the
  check-then-act hazard made operational.
* At normal end of execution any handle never closed is reported as a leak
  at the `open` that created it.

Two execution modes share this machinery: `interpret` runs a structured
program under a schedule; `replay` runs a bare statement sequence (a trace)
and reports whether it reproduces a bug, which is what trace minimality is
measured against.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..minilang import ast as A

_INT_RE = re.compile(r"^-?[0-9]+$")

DEFAULT_BUDGET = 10_000


class StepBudgetExceeded(Exception):
    """The run used more scheduler steps than the input's budget allows."""


class InterpError(Exception):
    """The program got stuck (type confusion etc.); not a bug outcome."""


@dataclass(frozen=True)
class Outcome:
    kind: str  # ok | null-deref | index-oob | parse-fail | leak | race-window | diverged
    node: int | None = None
    pair: tuple[int, int] | None = None

    def __str__(self) -> str:
        if self.kind == "race-window":
            return f"race-window@{self.pair}"
        if self.node is not None:
            return f"{self.kind}@{self.node}"
        return self.kind


OK = Outcome("ok")


@dataclass(frozen=True)
class ProgramInput:
    """One concrete run configuration: input values, environment failures,
    thread schedule, and a step budget."""

    values: dict[str, object] = field(default_factory=dict)
    failures: frozenset[int] = frozenset()
    schedule: tuple[int, ...] = ()
    budget: int = DEFAULT_BUDGET


@dataclass
class InterpResult:
    outcome: Outcome
    trace: tuple[int, ...]  # executed statement/guard node ids, in order


class _Cell:
    __slots__ = ("val",)

    def __init__(self, val: object):
        self.val = val


class _Handle:
    __slots__ = ("hid", "origin", "open")

    def __init__(self, hid: int, origin: int):
        self.hid = hid
        self.origin = origin
        self.open = True


class _Abort(Exception):
    def __init__(self, outcome: Outcome):
        self.outcome = outcome


class _EarlyExit(Exception):
    """A may-fail builtin failed; unwind to the enclosing procedure's exit."""


@dataclass
class _Window:
    guard: int  # node id of the if/while that opened the region
    cells: frozenset[int]  # ids of cells the guard read


@dataclass
class _Frame:
    proc: A.Procedure
    env: dict[str, _Cell]
    work: list  # stack of ("seq", stmts, [i]) / ("while", node) entries
    windows: list[_Window] = field(default_factory=list)


class _Thread:
    def __init__(self, tid: int, frame: _Frame):
        self.tid = tid
        self.frames = [frame]

    @property
    def alive(self) -> bool:
        return bool(self.frames)


class _Machine:
    """Shared runtime state: input, handles, cells, threads, trace."""

    def __init__(self, program: A.Program, inp: ProgramInput):
        self.program = program
        self.inp = inp
        self.steps_left = inp.budget
        self.handles: list[_Handle] = []
        self.trace: list[int] = []
        self.threads: list[_Thread] = []
        self.globals: dict[str, _Cell] = {}
        self.cell_ids: dict[int, int] = {}  # id(cell) -> creation index
        self.cell_owner: dict[int, int] = {}  # creation index -> owning tid

    def new_cell(self, val: object, tid: int) -> _Cell:
        c = _Cell(val)
        idx = len(self.cell_ids)
        self.cell_ids[id(c)] = idx
        self.cell_owner[idx] = tid
        return c

    def charge(self) -> None:
        if self.steps_left <= 0:
            raise StepBudgetExceeded()
        self.steps_left -= 1

    # -- expression evaluation -------------------------------------------

    def eval(self, e: A.Expr, env: dict[str, _Cell], stmt: A.Stmt, tid: int,
             reads: list[_Cell] | None = None) -> object:
        if isinstance(e, A.IntLit):
            return e.value
        if isinstance(e, A.StrLit):
            return e.value
        if isinstance(e, A.NullLit):
            return None
        if isinstance(e, A.Var):
            cell = env.get(e.name) or self.globals.get(e.name)
            if cell is None:
                raise InterpError(f"undefined variable {e.name!r}")
            if reads is not None:
                reads.append(cell)
            return cell.val
        if isinstance(e, A.Index):
            base = self.eval(e.base, env, stmt, tid, reads)
            idx = self.eval(e.index, env, stmt, tid, reads)
            if base is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(base, list) or not isinstance(idx, int):
                raise InterpError("indexing a non-array or with a non-int")
            if idx < 0 or idx >= len(base):
                raise _Abort(Outcome("index-oob", stmt.nid))
            return base[idx]
        if isinstance(e, A.BinOp):
            lhs = self.eval(e.lhs, env, stmt, tid, reads)
            rhs = self.eval(e.rhs, env, stmt, tid, reads)
            if lhs is None or rhs is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(lhs, int) or not isinstance(rhs, int):
                raise InterpError(f"arithmetic on non-ints ({e.op})")
            if e.op == "+":
                return lhs + rhs
            if e.op == "-":
                return lhs - rhs
            return lhs * rhs
        if isinstance(e, A.Cmp):
            lhs = self.eval(e.lhs, env, stmt, tid, reads)
            rhs = self.eval(e.rhs, env, stmt, tid, reads)
            if e.op == "==":
                return self._eq(lhs, rhs)
            if e.op == "!=":
                return not self._eq(lhs, rhs)
            if lhs is None or rhs is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(lhs, int) or not isinstance(rhs, int):
                raise InterpError(f"ordered comparison on non-ints ({e.op})")
            return {"<": lhs < rhs, "<=": lhs <= rhs, ">": lhs > rhs, ">=": lhs >= rhs}[e.op]
        if isinstance(e, A.BuiltinCall):
            return self.builtin(e, env, stmt, tid, reads)
        raise InterpError(f"cannot evaluate {type(e).__name__}")

    @staticmethod
    def _eq(a: object, b: object) -> bool:
        if isinstance(a, _Handle) or isinstance(b, _Handle):
            return a is b
        return a == b

    def builtin(self, e: A.BuiltinCall, env: dict[str, _Cell], stmt: A.Stmt,
                tid: int, reads: list[_Cell] | None) -> object:
        name = e.name
        if name == "read_input":
            key = self.eval(e.args[0], env, stmt, tid, reads)
            if not isinstance(key, str):
                raise InterpError("read_input key must be a string")
            val = self.inp.values.get(key)
            return list(val) if isinstance(val, list) else val
        arg = self.eval(e.args[0], env, stmt, tid, reads)
        if name == "open":
            if e.nid in self.inp.failures:
                raise _EarlyExit()
            h = _Handle(len(self.handles), stmt.nid)
            self.handles.append(h)
            return h
        if name == "close":
            if arg is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(arg, _Handle):
                raise InterpError("close on a non-handle")
            arg.open = False
            return None
        if name == "parseInt":
            if arg is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(arg, str):
                raise InterpError("parseInt on a non-string")
            if not _INT_RE.match(arg):
                raise _Abort(Outcome("parse-fail", stmt.nid))
            return int(arg)
        if name == "length":
            if arg is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(arg, (list, str)):
                raise InterpError("length on a non-array/string")
            return len(arg)
        if name == "abs":
            if arg is None:
                raise _Abort(Outcome("null-deref", stmt.nid))
            if not isinstance(arg, int):
                raise InterpError("abs on a non-int")
            return abs(arg)
        raise InterpError(f"unknown builtin {name!r}")

    # -- writes with race-window detection ---------------------------------

    def write(self, cell: _Cell, val: object, stmt: A.Stmt, tid: int) -> None:
        for th in self.threads:
            if th.tid == tid or not th.alive:
                continue
            for fr in th.frames:
                for w in fr.windows:
                    if id(cell) in w.cells:
                        raise _Abort(Outcome("race-window", pair=(stmt.nid, w.guard)))
        cell.val = val


def _seq(stmts: list[A.Stmt]) -> list:
    return ["seq", stmts, 0]


def _bind_args(m: _Machine, callee: A.Procedure, args: list[A.Expr],
               env: dict[str, _Cell], stmt: A.Stmt, tid: int, child_tid: int) -> dict[str, _Cell]:
    new_env: dict[str, _Cell] = {}
    for prm, arg in zip(callee.params, args):
        if prm.by_ref:
            assert isinstance(arg, A.Var)
            cell = env.get(arg.name) or m.globals.get(arg.name)
            if cell is None:
                raise InterpError(f"undefined variable {arg.name!r}")
            new_env[prm.name] = cell  # alias the caller's cell
        else:
            val = m.eval(arg, env, stmt, tid)
            new_env[prm.name] = m.new_cell(val, child_tid)
    return new_env


def _step(m: _Machine, th: _Thread) -> None:
    """Run one countable step of `th` (a statement or a guard evaluation)."""
    while True:
        if not th.frames:
            return
        frame = th.frames[-1]
        if not frame.work:
            th.frames.pop()
            continue
        top = frame.work[-1]
        if top[0] == "seq":
            _, stmts, i = top
            if i >= len(stmts):
                frame.work.pop()
                continue
            top[2] = i + 1
            stmt = stmts[i]
            if isinstance(stmt, A.While):
                # the guard evaluation is the next countable step
                frame.work.append(["while", stmt])
                continue
            _exec_stmt(m, th, frame, stmt)
            return
        if top[0] == "while":
            node: A.While = top[1]
            m.charge()
            m.trace.append(node.nid)
            reads: list[_Cell] = []
            try:
                cond = m.eval(node.cond, frame.env, node, th.tid, reads)
            except _EarlyExit:
                th.frames.pop()
                return
            if cond:
                w = _Window(node.nid, frozenset(id(c) for c in reads))
                frame.windows.append(w)
                frame.work.append(["region", w])
                frame.work.append(_seq(node.body))
            else:
                frame.work.pop()
            return
        if top[0] == "region":
            # sentinel: the guarded region beneath it has finished
            frame.windows.remove(top[1])
            frame.work.pop()
            continue
        raise AssertionError(top[0])


def _exec_stmt(m: _Machine, th: _Thread, frame: _Frame, stmt: A.Stmt) -> None:
    m.charge()
    m.trace.append(stmt.nid)
    env, tid = frame.env, th.tid
    try:
        if isinstance(stmt, A.VarDecl):
            val = m.eval(stmt.value, env, stmt, tid)
            if stmt.target.name in env:
                m.write(env[stmt.target.name], val, stmt, tid)
            else:
                env[stmt.target.name] = m.new_cell(val, tid)
        elif isinstance(stmt, A.Assign):
            if isinstance(stmt.target, A.Index):
                basec = env.get(stmt.target.base.name) or m.globals.get(stmt.target.base.name)
                if basec is None:
                    raise InterpError(f"undefined variable {stmt.target.base.name!r}")
                base = basec.val
                idx = m.eval(stmt.target.index, env, stmt, tid)
                val = m.eval(stmt.value, env, stmt, tid)
                if base is None:
                    raise _Abort(Outcome("null-deref", stmt.nid))
                if not isinstance(base, list) or not isinstance(idx, int):
                    raise InterpError("bad array store")
                if idx < 0 or idx >= len(base):
                    raise _Abort(Outcome("index-oob", stmt.nid))
                base[idx] = val
            else:
                cell = env.get(stmt.target.name) or m.globals.get(stmt.target.name)
                if cell is None:
                    raise InterpError(f"undefined variable {stmt.target.name!r}")
                val = m.eval(stmt.value, env, stmt, tid)
                m.write(cell, val, stmt, tid)
        elif isinstance(stmt, A.If):
            reads: list[_Cell] = []
            cond = m.eval(stmt.cond, env, stmt, tid, reads)
            body = stmt.then_body if cond else stmt.else_body
            if body:
                w = _Window(stmt.nid, frozenset(id(c) for c in reads))
                frame.windows.append(w)
                frame.work.append(["region", w])
                frame.work.append(_seq(body))
        elif isinstance(stmt, A.CallStmt):
            if stmt.name in A.BUILTINS:
                m.eval(A.BuiltinCall(stmt.nid, stmt.loc, stmt.name, stmt.args), env, stmt, tid)
            else:
                callee = m.program.proc(stmt.name)
                new_env = _bind_args(m, callee, stmt.args, env, stmt, tid, tid)
                th.frames.append(_Frame(callee, new_env, [_seq(callee.body)]))
        elif isinstance(stmt, A.SpawnStmt):
            callee = m.program.proc(stmt.name)
            child_tid = len(m.threads)
            new_env = _bind_args(m, callee, stmt.args, env, stmt, tid, child_tid)
            m.threads.append(_Thread(child_tid, _Frame(callee, new_env, [_seq(callee.body)])))
        elif isinstance(stmt, A.Return):
            th.frames.pop()
        else:
            raise InterpError(f"cannot execute {type(stmt).__name__}")
    except _EarlyExit:
        th.frames.pop()


def _leak_check(m: _Machine) -> Outcome:
    for h in m.handles:
        if h.open:
            return Outcome("leak", h.origin)
    return OK


def interpret(program: A.Program, inp: ProgramInput) -> InterpResult:
    """Run `program` to completion under `inp`; returns outcome plus the full
    executed trace (statement and guard node ids in execution order)."""
    m = _Machine(program, inp)
    main = program.main

    main_thread = _Thread(0, _Frame(main, {}, [_seq(main.body)]))
    if program.globals:
        # global declarations run first, on the main thread (stack top)
        main_thread.frames.append(_Frame(main, m.globals, [_seq(list(program.globals))]))
    m.threads.append(main_thread)

    sched = list(inp.schedule)
    si = 0
    try:
        while any(t.alive for t in m.threads):
            tid = None
            if si < len(sched):
                cand = sched[si]
                si += 1
                if 0 <= cand < len(m.threads) and m.threads[cand].alive:
                    tid = cand
            if tid is None:
                tid = min(t.tid for t in m.threads if t.alive)
            _step(m, m.threads[tid])
        outcome = _leak_check(m)
    except _Abort as a:
        outcome = a.outcome
    return InterpResult(outcome, tuple(m.trace))


# --- trace replay -----------------------------------------------------------


def replay(program: A.Program, seq: tuple[int, ...] | list[int],
           inp: ProgramInput) -> Outcome:
    """Execute a bare statement sequence (a trace) and report its outcome.

    The sequence is run as written: each element evaluates in the activation
    of the procedure that owns it; guards evaluate for effect only (either
    polarity is accepted) but open a race window over what they read.  Any
    statement that cannot execute — undefined variable, no live activation,
    missing spawn — makes the replay diverge, which callers treat as "does
    not reproduce the bug"."""
    m = _Machine(program, inp)

    owner: dict[int, A.Procedure] = {}
    for p in program.procs:
        for s in A.proc_statements(p):
            owner[s.nid] = p
    for g in program.globals:
        owner[g.nid] = program.main

    main_frame = _Frame(program.main, {}, [])
    main_th = _Thread(0, main_frame)
    m.threads.append(main_th)
    frames_by_proc: dict[str, tuple[_Thread, _Frame]] = {"main": (main_th, main_frame)}

    def env_for(stmt: A.Stmt) -> tuple[_Thread, _Frame] | None:
        p = owner.get(stmt.nid)
        if p is None:
            return None
        if p is program.main and stmt.nid in {g.nid for g in program.globals}:
            return main_th, _Frame(program.main, m.globals, [])
        return frames_by_proc.get(p.name)

    try:
        for nid in seq:
            node = program.node(nid)
            if not isinstance(node, A.Stmt):
                return Outcome("diverged")
            slot = env_for(node)
            if slot is None:
                return Outcome("diverged")
            th, frame = slot
            m.charge()
            m.trace.append(nid)
            env, tid = frame.env, th.tid
            try:
                if isinstance(node, A.VarDecl):
                    val = m.eval(node.value, env, node, tid)
                    if node.target.name in env:
                        m.write(env[node.target.name], val, node, tid)
                    else:
                        cell = m.new_cell(val, tid)
                        env[node.target.name] = cell
                        if frame.env is m.globals:
                            m.globals[node.target.name] = cell
                elif isinstance(node, A.Assign):
                    if isinstance(node.target, A.Index):
                        basec = env.get(node.target.base.name) or m.globals.get(node.target.base.name)
                        if basec is None:
                            return Outcome("diverged")
                        idx = m.eval(node.target.index, env, node, tid)
                        val = m.eval(node.value, env, node, tid)
                        base = basec.val
                        if base is None:
                            raise _Abort(Outcome("null-deref", node.nid))
                        if not isinstance(base, list) or not isinstance(idx, int):
                            return Outcome("diverged")
                        if idx < 0 or idx >= len(base):
                            raise _Abort(Outcome("index-oob", node.nid))
                        base[idx] = val
                    else:
                        cell = env.get(node.target.name) or m.globals.get(node.target.name)
                        if cell is None:
                            return Outcome("diverged")
                        val = m.eval(node.value, env, node, tid)
                        m.write(cell, val, node, tid)
                elif isinstance(node, (A.If, A.While)):
                    reads: list[_Cell] = []
                    m.eval(node.cond, env, node, tid, reads)
                    frame.windows.append(_Window(node.nid, frozenset(id(c) for c in reads)))
                elif isinstance(node, A.CallStmt):
                    if node.name in A.BUILTINS:
                        m.eval(A.BuiltinCall(node.nid, node.loc, node.name, node.args), env, node, tid)
                    else:
                        callee = m.program.proc(node.name)
                        new_env = _bind_args(m, callee, node.args, env, node, tid, tid)
                        frames_by_proc[callee.name] = (th, _Frame(callee, new_env, []))
                elif isinstance(node, A.SpawnStmt):
                    callee = m.program.proc(node.name)
                    child_tid = len(m.threads)
                    new_env = _bind_args(m, callee, node.args, env, node, tid, child_tid)
                    child_frame = _Frame(callee, new_env, [])
                    child = _Thread(child_tid, child_frame)
                    m.threads.append(child)
                    frames_by_proc[callee.name] = (child, child_frame)
                elif isinstance(node, A.Return):
                    pass
                else:
                    return Outcome("diverged")
            except _EarlyExit:
                frames_by_proc.pop(frame.proc.name, None)
        return _leak_check(m)
    except _Abort as a:
        return a.outcome
    except InterpError:
        return Outcome("diverged")
