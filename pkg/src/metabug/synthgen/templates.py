"""Program templates behind the synthetic corpus.

Six pattern families, each with a buggy form and one or more corrected
forms of the same shape:

* null deref, wrong order      — dereference placed before the null check
* null deref, missing check    — no null check at all
* array walk, off by one       — loop bound `<=` where `<` is needed
* parse, missing guard         — string parsed without checking it is non-empty
* handle leak, misplaced close — close placed after a later call that can fail
* shared write, unguarded read — spawned procedure overwrites a variable the
  spawner re-reads behind a staleness check

Corrected forms are not sterile: they keep the candidate pattern visible
(a guarded dereference, a `<` loop, a close behind an always-true branch)
so collectors still fire on them and ranking pools contain both labels.

Everything cosmetic — identifiers, literals, filler blocks — is drawn from
a seeded stream so the same seed always yields the same corpus.
"""

from __future__ import annotations

import hashlib
import random

# identifier pools per role; picked per-program so groups feel like
# different codebases
_POOLS = {
    "data": ["data", "cfg", "payload", "msg", "entry", "record"],
    "num": ["n", "count", "total", "size", "width"],
    "idx": ["i", "j", "pos", "cur"],
    "acc": ["acc", "sum", "tally", "agg"],
    "raw": ["raw", "text", "field", "token"],
    "handle": ["f", "fh", "log", "res"],
    "handle2": ["g", "aux", "tmpf", "side"],
    "snap": ["snap", "seen", "local", "copy"],
    "proc": ["worker", "updater", "refresher", "poller"],
    # "arr" and "num" are reserved for the array and parse templates, whose
    # batteries give those keys their own value domains
    "key": ["cfg", "msg", "name", "row", "blob"],
    "file": ["alpha.log", "beta.dat", "trace.out", "state.bin", "cache.tmp"],
    "str": ["ready", "init", "warm", "live", "stale"],
}


def derive_rng(*parts: object) -> random.Random:
    """Seeded RNG from a stable key; independent of hash randomization."""
    key = ":".join(str(p) for p in parts).encode()
    return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))


class Texture:
    """Per-program cosmetic state: names, literals, filler blocks."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self._taken: set[str] = set()
        self._filler_n = 0

    def name(self, role: str) -> str:
        pool = [n for n in _POOLS[role] if n not in self._taken]
        if not pool:
            pool = [f"{_POOLS[role][0]}{len(self._taken)}"]
        picked = self.rng.choice(pool)
        self._taken.add(picked)
        return picked

    def lit(self, role: str) -> str:
        return self.rng.choice(_POOLS[role])

    def int_lit(self, lo: int = 1, hi: int = 9) -> int:
        return self.rng.randint(lo, hi)

    def filler(self, indent: str = "    ") -> list[str]:
        """A harmless block: counted loop, arithmetic chain, guarded use of
        a local string, or a well-formed open/close pair."""
        k = self._filler_n
        self._filler_n += 1
        pick = self.rng.randrange(4)
        if pick == 0:
            v, bound = f"c{k}", self.rng.randint(2, 4)
            return [
                f"{indent}var {v} := 0;",
                f"{indent}while ({v} < {bound}) {{",
                f"{indent}    {v} := {v} + 1;",
                f"{indent}}}",
            ]
        if pick == 1:
            v = f"t{k}"
            a, b = self.int_lit(), self.int_lit()
            return [
                f"{indent}var {v} := {a};",
                f"{indent}{v} := {v} * {b};",
                f"{indent}{v} := {v} - 1;",
            ]
        if pick == 2:
            s, l = f"s{k}", f"l{k}"
            return [
                f'{indent}var {s} := "{self.lit("str")}";',
                f"{indent}if ({s} != null) {{",
                f"{indent}    var {l} := length({s});",
                f"{indent}}}",
            ]
        h = f"h{k}"
        return [
            f'{indent}var {h} := open("{self.lit("file")}");',
            f"{indent}close({h});",
        ]

    def maybe_filler(self, p: float = 0.5, indent: str = "    ") -> list[str]:
        return self.filler(indent) if self.rng.random() < p else []


def _assemble(body_lines: list[str], procs: tuple[str, ...] = ()) -> str:
    parts = list(procs)
    parts.append("proc main() {\n" + "\n".join(body_lines) + "\n}")
    return "\n\n".join(parts) + "\n"


# --- the six families --------------------------------------------------------


def npd_order(tx: Texture, buggy: bool) -> str:
    key = tx.lit("key")
    v, n = tx.name("data"), tx.name("num")
    body = tx.maybe_filler()
    body.append(f'    var {v} := read_input("{key}");')
    if buggy:
        # dereference first, check second
        body.append(f"    var {n} := length({v});")
        body.append(f"    if ({v} != null) {{")
        body.append(f"        {n} := {n} + {tx.int_lit()};")
        body.append("    }")
    else:
        body.append(f"    var {n} := 0;")
        body.append(f"    if ({v} != null) {{")
        body.append(f"        {n} := length({v});")
        body.append("    }")
    body += tx.maybe_filler()
    return _assemble(body)


def npd_missing_check(tx: Texture, buggy: bool) -> str:
    key = tx.lit("key")
    v, n = tx.name("data"), tx.name("num")
    body = tx.maybe_filler()
    body.append(f'    var {v} := read_input("{key}");')
    if buggy:
        body.append(f"    var {n} := length({v});")
        body.append(f"    {n} := {n} * {tx.int_lit(2, 4)};")
    else:
        body.append(f"    var {n} := 0;")
        body.append(f"    if ({v} != null) {{")
        body.append(f"        {n} := length({v});")
        body.append("    }")
        body.append(f"    {n} := {n} * {tx.int_lit(2, 4)};")
    body += tx.maybe_filler()
    return _assemble(body)


def aio_off_by_one(tx: Texture, buggy: bool) -> str:
    arr, i, acc = tx.name("data"), tx.name("idx"), tx.name("acc")
    cmp_op = "<=" if buggy else "<"
    body = tx.maybe_filler()
    body.append(f'    var {arr} := read_input("arr");')
    body.append(f"    if ({arr} != null) {{")
    body.append(f"        var {i} := 0;")
    body.append(f"        var {acc} := 0;")
    body.append(f"        while ({i} {cmp_op} length({arr})) {{")
    body.append(f"            {acc} := {acc} + {arr}[{i}];")
    body.append(f"            {i} := {i} + 1;")
    body.append("        }")
    body.append("    }")
    body += tx.maybe_filler()
    return _assemble(body)


def nfe_missing_guard(tx: Texture, buggy: bool) -> str:
    raw, n = tx.name("raw"), tx.name("num")
    body = tx.maybe_filler()
    body.append(f'    var {raw} := read_input("num");')
    body.append(f"    var {n} := 0;")
    if buggy:
        body.append(f"    {n} := parseInt({raw});")
    else:
        body.append(f"    if (length({raw}) > 0) {{")
        body.append(f"        {n} := parseInt({raw});")
        body.append("    }")
    body.append(f"    {n} := {n} + {tx.int_lit()};")
    body += tx.maybe_filler()
    return _assemble(body)


def leak_misplaced_close(tx: Texture, buggy: bool) -> str:
    f, g = tx.name("handle"), tx.name("handle2")
    name1, name2 = tx.lit("file"), tx.lit("file")
    body = tx.maybe_filler()
    if buggy:
        # the second open can fail, exiting before close(f) runs
        body.append(f'    var {f} := open("{name1}");')
        body.append(f'    var {g} := open("{name2}");')
        body.append(f"    close({g});")
        body.append(f"    close({f});")
    elif tx.rng.random() < 0.5:
        body.append(f'    var {f} := open("{name1}");')
        body.append(f"    close({f});")
        body.append(f'    var {g} := open("{name2}");')
        body.append(f"    close({g});")
    else:
        # close behind a branch the program always takes; a path-insensitive
        # scan still flags it
        mode = tx.name("num")
        body.append(f'    var {f} := open("{name1}");')
        body.append(f"    var {mode} := 1;")
        body.append(f"    if ({mode} == 1) {{")
        body.append(f"        close({f});")
        body.append("    }")
    body += tx.maybe_filler()
    return _assemble(body)


def race_unguarded_write(tx: Texture, buggy: bool) -> str:
    proc, v, n = tx.name("proc"), tx.name("data"), tx.name("num")
    m = "m"
    init = tx.lit("str")
    by_value_flavor = (not buggy) and tx.rng.random() < 0.4
    ref = "" if by_value_flavor else "ref "
    child = (
        f"proc {proc}({m}: {ref}string) {{\n"
        f"    {m} := null;\n"
        f"}}"
    )
    body = tx.maybe_filler()
    body.append(f'    var {v} := "{init}";')
    if buggy:
        body.append(f"    spawn {proc}({v});")
        body.append(f"    if ({v} != null) {{")
        body.append(f"        var {n} := length({v});")
        body.append("    }")
    elif by_value_flavor:
        # the spawned procedure only mutates its own copy
        body.append(f"    spawn {proc}({v});")
        body.append(f"    if ({v} != null) {{")
        body.append(f"        var {n} := length({v});")
        body.append("    }")
    else:
        # snapshot before sharing: the guarded reads use the copy
        snap = tx.name("snap")
        body.append(f"    var {snap} := {v};")
        body.append(f"    spawn {proc}({v});")
        body.append(f"    if ({snap} != null) {{")
        body.append(f"        var {n} := length({snap});")
        body.append("    }")
    return _assemble(body, procs=(child,))


TEMPLATES: dict[str, tuple] = {
    "NPD": (npd_order, npd_missing_check),
    "AIO": (aio_off_by_one,),
    "NFE": (nfe_missing_guard,),
    "LEAK": (leak_misplaced_close,),
    "RACE": (race_unguarded_write,),
}

# the runtime outcome each family is meant to produce
BUG_OUTCOME = {
    "NPD": "null-deref",
    "AIO": "index-oob",
    "NFE": "parse-fail",
    "LEAK": "leak",
    "RACE": "race-window",
}


def make_source(kind: str, rng: random.Random, buggy: bool) -> str:
    """One program of `kind`, buggy or corrected, cosmetics drawn from `rng`."""
    family = rng.choice(TEMPLATES[kind])
    return family(Texture(rng), buggy)
