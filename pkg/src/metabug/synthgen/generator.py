"""Corpus generation: grouped buggy/correct programs with ground truth.

For every buggy program the generator finds a concrete witness — an input
(values, failure set, schedule) from a seeded battery that makes the bug
happen — then shrinks the witness trace to a 1-minimal statement sequence
by repeated single-element deletion replayed against the program.  The
shrunk trace and the witness land in a `truth.json` next to the program.

Corrected programs are validated the opposite way: the whole battery must
run clean.  An optional noise fraction places buggy programs under the
correct label, mimicking an imperfect screening process; those files are
listed in the manifest and skipped by validation.

Layout written under the output directory::

    <kind>/<group>/buggy/<n>.mbl        program text
    <kind>/<group>/buggy/<n>.truth.json witness + minimal trace
    <kind>/<group>/correct/<n>.mbl
    manifest.json                       file inventory, seed, config echo
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..minilang import ast as A
from ..minilang.parser import parse_program
from .interp import InterpResult, Outcome, ProgramInput, StepBudgetExceeded, interpret, replay
from .templates import BUG_OUTCOME, derive_rng, make_source

BUG_KINDS = ("NPD", "AIO", "NFE", "LEAK", "RACE")


class InvalidConfig(ValueError):
    pass


class GenerationError(RuntimeError):
    """A template produced a program that failed its own validation."""


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    kinds: tuple[str, ...] = BUG_KINDS
    groups_per_kind: int = 3
    buggy_per_group: int = 2
    correct_ratio: int = 10     # correct programs per buggy one
    noise: float = 0.0          # fraction of correct-labeled files that are buggy
    battery_size: int = 50
    step_budget: int = 10_000

    def validate(self) -> None:
        if self.correct_ratio < 5:
            raise InvalidConfig("correct_ratio must be at least 5")
        if self.battery_size < 50:
            raise InvalidConfig("battery_size must be at least 50")
        if not (0.0 <= self.noise <= 0.5):
            raise InvalidConfig("noise must be within [0, 0.5]")
        if self.groups_per_kind < 1 or self.buggy_per_group < 1:
            raise InvalidConfig("need at least one group and one buggy program per group")
        unknown = [k for k in self.kinds if k not in BUG_KINDS]
        if unknown:
            raise InvalidConfig(f"unknown bug kinds: {unknown}")


@dataclass
class GeneratedProgram:
    kind: str
    group: str
    label: str              # "buggy" | "correct"
    index: int
    source: str
    program: A.Program
    truth: dict | None = None
    is_noise: bool = False

    @property
    def rel_path(self) -> str:
        return f"{self.kind.lower()}/{self.group}/{self.label}/{self.index}.mbl"


# --- input battery -----------------------------------------------------------


def _read_keys(program: A.Program) -> list[str]:
    keys = set()
    for n in A.walk_program(program):
        if isinstance(n, A.BuiltinCall) and n.name == "read_input":
            if n.args and isinstance(n.args[0], A.StrLit):
                keys.add(n.args[0].value)
    return sorted(keys)


def _open_sites(program: A.Program) -> list[int]:
    return sorted(
        n.nid for n in A.walk_program(program)
        if isinstance(n, A.BuiltinCall) and n.name == "open"
    )


def _has_spawn(program: A.Program) -> bool:
    return any(isinstance(n, A.SpawnStmt) for n in A.walk_program(program))


_ABSENT = object()


def _value_domain(kind: str, key: str) -> list[object]:
    if key == "arr":
        return [[], [1], [3, 1, 4], [2, 7, 1, 8], _ABSENT]
    if key == "num":
        # strings headed for parseInt; empty is the interesting one
        return ["0", "7", "42", "-3", "1000", ""]
    return ["alpha", "midnight", "x", _ABSENT]


def build_battery(program: A.Program, kind: str, cfg: GenConfig, salt: str) -> list[ProgramInput]:
    """A deterministic battery of at least `cfg.battery_size` distinct inputs.

    Canonical probes come first — every single-key absence, every empty
    string, every single open failure, the write-between-check-and-use
    schedule — so witness search is stable; random fill follows."""
    rng = derive_rng(cfg.seed, "battery", salt)
    keys = _read_keys(program)
    opens = _open_sites(program)
    spawns = _has_spawn(program)

    def base_values() -> dict:
        vals = {}
        for k in keys:
            dom = [d for d in _value_domain(kind, k) if d is not _ABSENT]
            vals[k] = dom[0]
        return vals

    inputs: list[ProgramInput] = []
    seen: set[str] = set()

    def add(values: dict, failures: frozenset[int] = frozenset(), schedule: tuple[int, ...] = ()):
        fp = json.dumps([sorted(values.items()), sorted(failures), list(schedule)], sort_keys=True)
        if fp in seen:
            return
        seen.add(fp)
        inputs.append(ProgramInput(
            values=dict(values), failures=failures, schedule=schedule,
            budget=cfg.step_budget,
        ))

    # canonical probes
    add(base_values())
    for k in keys:
        for d in _value_domain(kind, k):
            vals = base_values()
            if d is _ABSENT:
                del vals[k]
            else:
                vals[k] = d
            add(vals)
    for site in opens:
        add(base_values(), failures=frozenset([site]))
    if opens:
        add(base_values(), failures=frozenset(opens))
    max_pause = 0
    if spawns:
        # one schedule entry is consumed per executed statement, so sweep
        # the spawned thread's turn across the whole main-thread run
        probe = ProgramInput(values=base_values(), failures=frozenset(),
                             schedule=(), budget=cfg.step_budget)
        ref = _run(program, probe)
        max_pause = min(len(ref.trace) + 2, 64) if ref is not None else 16
        for pause in range(1, max_pause + 1):
            add(base_values(), schedule=(0,) * pause + (1,))
        add(base_values(), schedule=(1, 0))

    # random fill to size
    guard = 0
    while len(inputs) < cfg.battery_size and guard < cfg.battery_size * 50:
        guard += 1
        vals = {}
        for k in keys:
            d = rng.choice(_value_domain(kind, k))
            if d is not _ABSENT:
                vals[k] = d
        failures = frozenset(s for s in opens if rng.random() < 0.3)
        schedule: tuple[int, ...] = ()
        if spawns:
            schedule = tuple(rng.randrange(2)
                             for _ in range(rng.randint(0, max(8, max_pause))))
        add(vals, failures, schedule)
    if len(inputs) < cfg.battery_size:
        # tiny input space (no keys, opens, or threads): pad with distinct
        # but inert extra values on top of the base assignment
        i = 0
        while len(inputs) < cfg.battery_size:
            vals = base_values()
            vals[f"unused{i}"] = "pad"
            add(vals)
            i += 1
    return inputs


# --- witnesses and minimal traces ---------------------------------------------


def _run(program: A.Program, inp: ProgramInput) -> InterpResult | None:
    try:
        return interpret(program, inp)
    except StepBudgetExceeded:
        return None


def find_witness(
    program: A.Program, kind: str, battery: list[ProgramInput]
) -> tuple[ProgramInput, InterpResult] | None:
    """First battery input whose outcome is the bug this kind means."""
    want = BUG_OUTCOME[kind]
    for inp in battery:
        res = _run(program, inp)
        if res is not None and res.outcome.kind == want:
            return inp, res
    return None


def minimize_trace(
    program: A.Program, inp: ProgramInput, target: Outcome, trace: tuple[int, ...]
) -> tuple[int, ...]:
    """Greedy 1-minimal shrink: drop elements one at a time while the replay
    still reproduces `target` exactly."""
    seq = list(trace)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(seq):
            cand = seq[:i] + seq[i + 1:]
            if replay(program, tuple(cand), inp) == target:
                seq = cand
                changed = True
            else:
                i += 1
    return tuple(seq)


def bug_point_of(outcome: Outcome) -> int:
    if outcome.pair is not None:
        return outcome.pair[0]  # the racing write
    assert outcome.node is not None
    return outcome.node


def make_truth(program: A.Program, kind: str, battery: list[ProgramInput]) -> dict | None:
    found = find_witness(program, kind, battery)
    if found is None:
        return None
    inp, res = found
    tbar = minimize_trace(program, inp, res.outcome, res.trace)
    return {
        "bug_kind": kind,
        "bug_point": bug_point_of(res.outcome),
        "outcome": str(res.outcome),
        "input": {
            "values": inp.values,
            "failures": sorted(inp.failures),
            "schedule": list(inp.schedule),
        },
        "minimal_trace": list(tbar),
    }


def runs_clean(program: A.Program, battery: list[ProgramInput]) -> bool:
    for inp in battery:
        res = _run(program, inp)
        if res is None or res.outcome.kind != "ok":
            return False
    return True


# --- corpus assembly ----------------------------------------------------------


def synthesize_group(kind: str, group_idx: int, cfg: GenConfig) -> list[GeneratedProgram]:
    """All programs of one group, validated, with truth attached to buggy ones."""
    gid = f"g{group_idx:03d}"
    out: list[GeneratedProgram] = []
    n_correct = cfg.buggy_per_group * cfg.correct_ratio
    noise_rng = derive_rng(cfg.seed, "noise", kind, gid)

    for b in range(cfg.buggy_per_group):
        rng = derive_rng(cfg.seed, kind, gid, "buggy", b)
        src = make_source(kind, rng, buggy=True)
        prog = parse_program(src)
        battery = build_battery(prog, kind, cfg, salt=f"{kind}:{gid}:b{b}")
        truth = make_truth(prog, kind, battery)
        if truth is None:
            raise GenerationError(f"{kind} {gid} buggy#{b}: no battery input triggers the bug")
        out.append(GeneratedProgram(kind, gid, "buggy", b, src, prog, truth=truth))

    for c in range(n_correct):
        is_noise = noise_rng.random() < cfg.noise
        rng = derive_rng(cfg.seed, kind, gid, "correct", c)
        src = make_source(kind, rng, buggy=is_noise)
        prog = parse_program(src)
        battery = build_battery(prog, kind, cfg, salt=f"{kind}:{gid}:c{c}")
        if is_noise:
            if make_truth(prog, kind, battery) is None:
                raise GenerationError(f"{kind} {gid} noise#{c}: mislabeled program is not buggy")
        elif not runs_clean(prog, battery):
            raise GenerationError(f"{kind} {gid} correct#{c}: battery found a failure")
        out.append(GeneratedProgram(kind, gid, "correct", c, src, prog, is_noise=is_noise))
    return out


def generate_corpus(cfg: GenConfig, out_dir: str | Path) -> dict:
    """Write the corpus under `out_dir` and return the manifest."""
    cfg.validate()
    root = Path(out_dir)
    manifest: dict = {
        "schema": "corpus-manifest/1",
        "seed": cfg.seed,
        "config": asdict(cfg),
        "kinds": {},
        "totals": {"buggy": 0, "correct": 0},
    }
    for kind in cfg.kinds:
        groups = []
        for gi in range(cfg.groups_per_kind):
            programs = synthesize_group(kind, gi, cfg)
            entry = {"id": f"g{gi:03d}", "buggy": [], "correct": [], "noise": []}
            for gp in programs:
                path = root / gp.rel_path
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(gp.source)
                entry[gp.label].append(gp.rel_path)
                manifest["totals"][gp.label] += 1
                if gp.is_noise:
                    entry["noise"].append(gp.rel_path)
                if gp.truth is not None:
                    tpath = path.with_suffix("").with_suffix(".truth.json")
                    tpath.write_text(json.dumps(gp.truth, indent=2, sort_keys=True) + "\n")
            groups.append(entry)
        manifest["kinds"][kind] = {"groups": groups}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
