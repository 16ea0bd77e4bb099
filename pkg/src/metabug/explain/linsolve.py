"""Satisfiability of conjunctions of linear integer constraints.

Constraints are affine expressions over named integer symbols, each
required to satisfy ``expr <= 0`` or ``expr == 0``.  Equalities are
substituted away with exact rational arithmetic, then Fourier-Motzkin
elimination decides the remaining inequalities.  A concrete integer
witness is recovered by bounded enumeration when the system is small;
larger systems report satisfiability without one.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

log = logging.getLogger(__name__)

# Fourier-Motzkin can square the constraint count per eliminated symbol;
# past this size we give up and call the system satisfiable.
_BLOWUP_CAP = 20_000

# Witness enumeration effort limits.
_ENUM_SYMBOLS = 6
_ENUM_COMBOS = 250_000
_ENUM_BOX = 8


class UnsupportedConstraint(Exception):
    """A constraint fell outside the linear integer fragment."""


class LinExpr:
    """Affine form sum(coeffs[s] * s) + const with Fraction arithmetic."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict[str, Fraction] | None = None,
                 const: int | Fraction = 0):
        self.coeffs: dict[str, Fraction] = {
            s: Fraction(c) for s, c in (coeffs or {}).items() if c != 0
        }
        self.const = Fraction(const)

    @staticmethod
    def sym(name: str) -> "LinExpr":
        return LinExpr({name: Fraction(1)})

    @staticmethod
    def const_of(k: int | Fraction) -> "LinExpr":
        return LinExpr({}, k)

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "LinExpr") -> "LinExpr":
        coeffs = dict(self.coeffs)
        for s, c in other.coeffs.items():
            coeffs[s] = coeffs.get(s, Fraction(0)) + c
        return LinExpr(coeffs, self.const + other.const)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def __neg__(self) -> "LinExpr":
        return self.scaled(Fraction(-1))

    def scaled(self, k: Fraction) -> "LinExpr":
        return LinExpr({s: c * k for s, c in self.coeffs.items()}, self.const * k)

    def shifted(self, k: int | Fraction) -> "LinExpr":
        return LinExpr(self.coeffs, self.const + Fraction(k))

    def substitute(self, name: str, value: "LinExpr") -> "LinExpr":
        if name not in self.coeffs:
            return self
        c = self.coeffs[name]
        rest = LinExpr({s: v for s, v in self.coeffs.items() if s != name},
                       self.const)
        return rest + value.scaled(c)

    def evaluate(self, env: dict[str, int]) -> Fraction:
        return self.const + sum(
            (c * env.get(s, 0) for s, c in self.coeffs.items()), Fraction(0)
        )

    def render(self) -> str:
        parts: list[str] = []
        for s in sorted(self.coeffs):
            c = self.coeffs[s]
            mag = abs(c)
            term = s if mag == 1 else f"{mag}*{s}"
            if not parts:
                parts.append(term if c > 0 else f"-{term}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {term}")
        if self.const != 0 or not parts:
            k = self.const
            if not parts:
                parts.append(str(k))
            else:
                parts.append(f"{'+' if k > 0 else '-'} {abs(k)}")
        return " ".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"LinExpr({self.render()})"


@dataclass
class Constraint:
    """``expr <= 0`` when eq is False, ``expr == 0`` when eq is True."""

    expr: LinExpr
    eq: bool = False
    note: str = ""  # human-readable origin, e.g. "i >= length(arr)"

    def holds(self, env: dict[str, int]) -> bool:
        v = self.expr.evaluate(env)
        return v == 0 if self.eq else v <= 0

    def render(self) -> str:
        if self.note:
            return self.note
        return f"{self.expr.render()} {'==' if self.eq else '<='} 0"


def le(expr: LinExpr, note: str = "") -> Constraint:
    return Constraint(expr, eq=False, note=note)


def eq(expr: LinExpr, note: str = "") -> Constraint:
    return Constraint(expr, eq=True, note=note)


@dataclass
class Feasibility:
    sat: bool
    witness: dict[str, int] | None = None
    capped: bool = False  # True when the solver gave up and assumed sat


def _eliminate_equalities(
    constraints: list[Constraint],
) -> tuple[list[LinExpr], list[tuple[str, LinExpr]], bool]:
    """Substitute equalities away.

    Returns (inequality exprs, substitutions in application order,
    consistent)."""
    ineqs = [c.expr for c in constraints if not c.eq]
    eqs = [c.expr for c in constraints if c.eq]
    subs: list[tuple[str, LinExpr]] = []
    while eqs:
        e = eqs.pop()
        if e.is_const:
            if e.const != 0:
                return [], subs, False
            continue
        name, coeff = next(iter(sorted(e.coeffs.items())))
        # name = -(rest)/coeff
        rest = LinExpr({s: c for s, c in e.coeffs.items() if s != name}, e.const)
        value = rest.scaled(Fraction(-1, 1) / coeff)
        subs.append((name, value))
        eqs = [x.substitute(name, value) for x in eqs]
        ineqs = [x.substitute(name, value) for x in ineqs]
    return ineqs, subs, True


_ElimStep = tuple[str, list[LinExpr], list[LinExpr]]  # (symbol, lowers, uppers)


def _fourier_motzkin(ineqs: list[LinExpr]) -> tuple[bool, bool, list[_ElimStep]]:
    """Decide sat of {e <= 0}; returns (sat, capped, elimination trail)."""
    current = list(ineqs)
    trail: list[_ElimStep] = []
    while True:
        for e in current:
            if e.is_const and e.const > 0:
                return False, False, trail
        symbols = sorted({s for e in current for s in e.coeffs})
        if not symbols:
            return True, False, trail
        # eliminate the symbol appearing in the fewest constraints
        name = min(symbols, key=lambda s: sum(1 for e in current if s in e.coeffs))
        lowers: list[LinExpr] = []   # name >= expr
        uppers: list[LinExpr] = []   # name <= expr
        rest: list[LinExpr] = []
        for e in current:
            c = e.coeffs.get(name)
            if c is None:
                rest.append(e)
                continue
            # c*name + r <= 0  ->  name <= -r/c (c>0) or name >= -r/c (c<0)
            r = LinExpr({s: v for s, v in e.coeffs.items() if s != name}, e.const)
            bound = r.scaled(Fraction(-1) / c)
            (uppers if c > 0 else lowers).append(bound)
        trail.append((name, lowers, uppers))
        for lo, hi in itertools.product(lowers, uppers):
            rest.append(lo - hi)  # lo <= hi
        if len(rest) > _BLOWUP_CAP:
            log.warning("constraint elimination exceeded %d rows; assuming sat",
                        _BLOWUP_CAP)
            return True, True, trail
        current = rest


def _backsolve(trail: list[_ElimStep], subs: list[tuple[str, LinExpr]],
               constraints: list[Constraint]) -> dict[str, int] | None:
    """Recover an integer witness by walking the elimination trail backwards.

    Each eliminated symbol is pinned inside its (already numeric) bounds,
    preferring integers; equality substitutions are then replayed in
    reverse.  Returns None when the rational solution refuses to land on
    integers."""
    env: dict[str, Fraction] = {}
    for name, lowers, uppers in reversed(trail):
        lo = max((e.evaluate(env) for e in lowers), default=None)
        hi = min((e.evaluate(env) for e in uppers), default=None)
        if lo is None and hi is None:
            v = Fraction(0)
        elif lo is None:
            v = Fraction(min(_floor(hi), 0))
        elif hi is None:
            v = Fraction(max(_ceil(lo), 0))
        elif lo > hi:
            return None  # capped elimination can leave a hollow range
        else:
            c = Fraction(_ceil(lo))
            v = c if c <= hi else (lo + hi) / 2
        env[name] = v
    for name, value in reversed(subs):
        env[name] = value.evaluate(env)
    if any(v.denominator != 1 for v in env.values()):
        return None
    out = {s: int(v) for s, v in env.items()}
    if all(c.holds(out) for c in constraints):
        return out
    return None


def _bounds_box(constraints: list[Constraint]) -> dict[str, tuple[int, int]]:
    """Per-symbol integer search ranges from single-symbol constraints."""
    symbols = sorted({s for c in constraints for s in c.expr.coeffs})
    lo: dict[str, int] = {}
    hi: dict[str, int] = {}
    for c in constraints:
        e = c.expr
        if len(e.coeffs) != 1:
            continue
        (name, coeff), = e.coeffs.items()
        bound = -e.const / coeff
        if c.eq:
            if bound.denominator == 1:
                lo[name] = max(lo.get(name, int(bound)), int(bound))
                hi[name] = min(hi.get(name, int(bound)), int(bound))
            continue
        if coeff > 0:  # name <= bound
            hi[name] = min(hi.get(name, _floor(bound)), _floor(bound))
        else:          # name >= bound
            lo[name] = max(lo.get(name, _ceil(bound)), _ceil(bound))
    box: dict[str, tuple[int, int]] = {}
    for s in symbols:
        # anchor the default window on whatever bounds were derived, so a
        # symbol forced outside [-8, 8] still gets a workable range
        if s in lo and s in hi:
            box[s] = (lo[s], hi[s])
        elif s in lo:
            box[s] = (lo[s], max(lo[s] + 2 * _ENUM_BOX, _ENUM_BOX))
        elif s in hi:
            box[s] = (min(hi[s] - 2 * _ENUM_BOX, -_ENUM_BOX), hi[s])
        else:
            box[s] = (-_ENUM_BOX, _ENUM_BOX)
    return box


def _floor(f: Fraction) -> int:
    return f.numerator // f.denominator


def _ceil(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


def _propagate(box: dict[str, tuple[int, int]],
               constraints: list[Constraint],
               rounds: int = 4) -> dict[str, tuple[int, int]] | None:
    """Tighten enumeration ranges with interval bounds consistency.

    Purely a search-space refinement: an empty range only means the
    heuristic box holds no witness, not that none exists."""
    exprs: list[LinExpr] = []
    for c in constraints:
        exprs.append(c.expr)
        if c.eq:
            exprs.append(-c.expr)
    cur = dict(box)
    for _ in range(rounds):
        changed = False
        for e in exprs:
            for t, ct in e.coeffs.items():
                rest_min = e.const
                for s, cs in e.coeffs.items():
                    if s == t:
                        continue
                    lo, hi = cur[s]
                    rest_min += cs * (lo if cs > 0 else hi)
                bound = -rest_min / ct
                lo, hi = cur[t]
                if ct > 0:
                    hi = min(hi, _floor(bound))
                else:
                    lo = max(lo, _ceil(bound))
                if (lo, hi) != cur[t]:
                    cur[t] = (lo, hi)
                    changed = True
                    if lo > hi:
                        return None
        if not changed:
            break
    return cur


def _enumerate_witness(constraints: list[Constraint]) -> dict[str, int] | None:
    raw = _bounds_box(constraints)
    if len(raw) > _ENUM_SYMBOLS:
        return None
    box = _propagate(raw, constraints)
    if box is None:
        return None
    ranges = []
    combos = 1
    for s, (lo, hi) in sorted(box.items()):
        if lo > hi:
            return None
        combos *= hi - lo + 1
        if combos > _ENUM_COMBOS:
            return None
        ranges.append((s, range(lo, hi + 1)))
    names = [s for s, _ in ranges]
    for values in itertools.product(*(r for _, r in ranges)):
        env = dict(zip(names, values))
        if all(c.holds(env) for c in constraints):
            return env
    return None


def check_feasible(constraints: list[Constraint]) -> Feasibility:
    """Decide a conjunction of constraints.

    Infeasible verdicts are exact: they always correspond to a rationally
    unsatisfiable system, hence an integer-unsatisfiable one.  Feasible
    verdicts are rational; the integer witness is best-effort.
    """
    constraints = list(constraints)
    ineqs, subs, consistent = _eliminate_equalities(constraints)
    if not consistent:
        return Feasibility(sat=False)
    sat, capped, trail = _fourier_motzkin(ineqs)
    if not sat:
        return Feasibility(sat=False)
    witness = _backsolve(trail, subs, constraints)
    if witness is None:
        witness = _enumerate_witness(constraints)
    if witness is not None:
        for s in {s for c in constraints for s in c.expr.coeffs}:
            witness.setdefault(s, 0)
    return Feasibility(sat=True, witness=witness, capped=capped)


def render_conjunction(constraints: list[Constraint]) -> str:
    seen: list[str] = []
    for c in constraints:
        r = c.render()
        if r not in seen:
            seen.append(r)
    return " and ".join(seen) if seen else "true"
