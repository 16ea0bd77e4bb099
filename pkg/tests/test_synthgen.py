"""Interpreter semantics, witness search, trace minimization, corpus layout."""

from __future__ import annotations

import json

import pytest

from metabug.minilang import ast as A, parse_program
from metabug.synthgen import (
    BUG_OUTCOME, GenConfig, InvalidConfig, ProgramInput, StepBudgetExceeded,
    TEMPLATES, build_battery, derive_rng, find_witness, generate_corpus,
    interpret, make_source, minimize_trace, replay, runs_clean,
)


# --- interpreter ----------------------------------------------------------------


NPD = parse_program("""
proc main() {
    var msg := read_input("msg");
    var n := length(msg);
}
""")


def test_null_deref_fires_at_the_deref_statement():
    r = interpret(NPD, ProgramInput(values={"msg": None}))
    assert r.outcome.kind == "null-deref"
    assert r.outcome.node == NPD.procs[0].body[1].nid


def test_non_null_input_runs_clean():
    r = interpret(NPD, ProgramInput(values={"msg": "hi"}))
    assert r.outcome.kind == "ok"


def test_index_out_of_bounds():
    p = parse_program('proc main() { var arr := read_input("arr"); var v := arr[3]; }')
    assert interpret(p, ProgramInput(values={"arr": [1, 2]})).outcome.kind == "index-oob"
    assert interpret(p, ProgramInput(values={"arr": [1, 2, 3, 4]})).outcome.kind == "ok"


def test_parse_failure_on_non_numeric_text():
    p = parse_program('proc main() { var raw := read_input("raw"); var n := parseInt(raw); }')
    assert interpret(p, ProgramInput(values={"raw": "zz"})).outcome.kind == "parse-fail"
    assert interpret(p, ProgramInput(values={"raw": "42"})).outcome.kind == "ok"


LEAKY = parse_program("""
proc main() {
    var a := open("x");
    var b := open("y");
    close(b);
    close(a);
}
""")


def test_failed_open_exits_early_and_leaks_the_live_handle():
    opens = [n.nid for n in A.walk_program(LEAKY)
             if isinstance(n, A.BuiltinCall) and n.name == "open"]
    r = interpret(LEAKY, ProgramInput(failures=frozenset({opens[1]})))
    assert r.outcome.kind == "leak"
    assert r.outcome.node == LEAKY.procs[0].body[0].nid  # handle a never closed
    assert interpret(LEAKY, ProgramInput()).outcome.kind == "ok"


RACY_SRC = """
proc refresher(m: ref string) {
    m := null;
}

proc main() {
    var cfg := "ready";
    spawn refresher(cfg);
    if (cfg != null) {
        var n := length(cfg);
    }
}
"""


def test_race_window_write_between_check_and_use():
    p = parse_program(RACY_SRC)
    write = p.procs[0].body[0]
    guard = p.procs[1].body[2]
    hit = None
    for pause in range(1, 10):
        r = interpret(p, ProgramInput(schedule=(0,) * pause + (1,)))
        if r.outcome.kind == "race-window":
            hit = r
            break
    assert hit is not None
    assert hit.outcome.pair == (write.nid, guard.nid)


def test_unscheduled_run_is_serial_and_clean():
    r = interpret(parse_program(RACY_SRC), ProgramInput())
    # main runs to completion first, then the spawned thread nulls cfg
    assert r.outcome.kind == "ok"


def test_invalid_thread_pick_still_consumes_a_slot():
    p = parse_program(RACY_SRC)
    # slot values beyond the live thread set fall back to the default
    # thread, so an all-invalid schedule behaves like the empty one
    a = interpret(p, ProgramInput(schedule=(9,) * 12))
    b = interpret(p, ProgramInput())
    assert a.outcome.kind == b.outcome.kind == "ok"
    assert a.trace == b.trace


def test_while_guard_appears_in_trace_once_per_evaluation():
    p = parse_program("""
        proc main() {
            var i := 0;
            while (i < 3) {
                i := i + 1;
            }
        }
    """)
    guard = p.procs[0].body[1]
    r = interpret(p, ProgramInput())
    assert r.outcome.kind == "ok"
    assert list(r.trace).count(guard.nid) == 4  # 3 true evaluations + final false


def test_step_budget_cuts_off_infinite_loops():
    p = parse_program("proc main() { var i := 0; while (i < 10) { i := i; } }")
    with pytest.raises(StepBudgetExceeded):
        interpret(p, ProgramInput(budget=50))


def test_interpreter_is_deterministic():
    p = parse_program(RACY_SRC)
    inp = ProgramInput(schedule=(0, 0, 1, 0, 1))
    a, b = interpret(p, inp), interpret(p, inp)
    assert str(a.outcome) == str(b.outcome)
    assert a.trace == b.trace


# --- witness search and trace minimization ----------------------------------------


def _is_subseq(small, big):
    it = iter(big)
    return all(x in it for x in small)


@pytest.mark.parametrize("kind", TEMPLATES)
def test_every_buggy_template_has_a_battery_witness(kind):
    cfg = GenConfig(seed=5)
    for salt in ("w0", "w1", "w2"):
        p = parse_program(make_source(kind, derive_rng(5, "wit", kind, salt), buggy=True))
        battery = build_battery(p, kind, cfg, salt)
        found = find_witness(p, kind, battery)
        assert found is not None, (kind, salt)
        inp, res = found
        assert res.outcome.kind == BUG_OUTCOME[kind]


@pytest.mark.parametrize("kind", TEMPLATES)
def test_correct_variants_run_clean_over_their_battery(kind):
    cfg = GenConfig(seed=5)
    for salt in ("c0", "c1"):
        p = parse_program(make_source(kind, derive_rng(5, "ok", kind, salt), buggy=False))
        battery = build_battery(p, kind, cfg, salt)
        assert runs_clean(p, battery), (kind, salt)


@pytest.mark.parametrize("kind", TEMPLATES)
def test_minimized_trace_reproduces_and_is_1_minimal(kind):
    cfg = GenConfig(seed=9)
    p = parse_program(make_source(kind, derive_rng(9, "min", kind), buggy=True))
    battery = build_battery(p, kind, cfg, "min")
    inp, res = find_witness(p, kind, battery)
    seq = minimize_trace(p, inp, res.outcome, res.trace)
    assert _is_subseq(seq, res.trace)
    assert str(replay(p, seq, inp)) == str(res.outcome)
    # dropping any single step breaks reproduction: nothing is dead weight
    for i in range(len(seq)):
        shorter = seq[:i] + seq[i + 1:]
        assert str(replay(p, shorter, inp)) != str(res.outcome), (kind, i)


# --- configuration validation ------------------------------------------------------


def test_config_rejects_thin_correct_pools():
    with pytest.raises(InvalidConfig):
        GenConfig(correct_ratio=4).validate()


def test_config_rejects_small_batteries():
    with pytest.raises(InvalidConfig):
        GenConfig(battery_size=49).validate()


def test_config_rejects_heavy_noise():
    with pytest.raises(InvalidConfig):
        GenConfig(noise=0.6).validate()


def test_config_rejects_unknown_kind():
    with pytest.raises(InvalidConfig):
        GenConfig(kinds=("NPD", "XYZ")).validate()


def test_default_config_is_valid():
    GenConfig().validate()


# --- corpus layout ------------------------------------------------------------------


def test_corpus_files_match_manifest(tiny_corpus):
    manifest = json.loads((tiny_corpus / "manifest.json").read_text())
    assert manifest["schema"] == "corpus-manifest/1"
    on_disk = sorted(str(f.relative_to(tiny_corpus)) for f in tiny_corpus.rglob("*.mbl"))
    buggy = [f for f in on_disk if "/buggy/" in f]
    correct = [f for f in on_disk if "/correct/" in f]
    assert manifest["totals"]["buggy"] == len(buggy)
    assert manifest["totals"]["correct"] == len(correct)
    listed = []
    for kind, entry in manifest["kinds"].items():
        assert kind in BUG_OUTCOME
        for group in entry["groups"]:
            assert group["buggy"], (kind, group["id"])
            listed += group["buggy"] + group["correct"]
            for i, rel in enumerate(group["buggy"]):
                assert rel == f"{kind.lower()}/{group['id']}/buggy/{i}.mbl"
    assert sorted(listed) == on_disk


def test_every_buggy_program_ships_a_verified_truth(tiny_corpus):
    checked = 0
    for prog_path in tiny_corpus.rglob("*.mbl"):
        if "buggy" not in prog_path.parts:
            continue
        truth_path = prog_path.with_suffix("").with_suffix(".truth.json")
        truth = json.loads(truth_path.read_text())
        program = parse_program(prog_path.read_text())
        inp = ProgramInput(
            values=truth["input"]["values"],
            failures=frozenset(truth["input"]["failures"]),
            schedule=tuple(truth["input"]["schedule"]),
        )
        res = interpret(program, inp)
        assert str(res.outcome) == truth["outcome"]
        assert res.outcome.kind == BUG_OUTCOME[truth["bug_kind"]]
        assert truth["bug_point"] in truth["minimal_trace"]
        assert _is_subseq(truth["minimal_trace"], res.trace)
        checked += 1
    assert checked == 10  # 5 kinds x 2 groups x 1 buggy


def test_correct_programs_parse_and_carry_no_truth(tiny_corpus):
    n = 0
    for prog_path in tiny_corpus.rglob("*.mbl"):
        if "correct" not in prog_path.parts:
            continue
        parse_program(prog_path.read_text())
        assert not prog_path.with_suffix("").with_suffix(".truth.json").exists()
        n += 1
    assert n == 10 * GenConfig().correct_ratio


def test_generation_is_reproducible(tmp_path):
    cfg = GenConfig(seed=11, groups_per_kind=2, buggy_per_group=1)
    a, b = tmp_path / "a", tmp_path / "b"
    generate_corpus(cfg, a)
    generate_corpus(cfg, b)
    fa = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    fb = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert fa == fb
    for rel in fa:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_noise_knob_perturbs_some_programs(tmp_path):
    quiet = GenConfig(seed=11, groups_per_kind=1, buggy_per_group=1)
    noisy = GenConfig(seed=11, groups_per_kind=1, buggy_per_group=1, noise=0.5)
    a, b = tmp_path / "quiet", tmp_path / "noisy"
    generate_corpus(quiet, a)
    generate_corpus(noisy, b)
    differing = 0
    for rel in sorted(p.relative_to(a) for p in a.rglob("*.mbl")):
        if (a / rel).read_bytes() != (b / rel).read_bytes():
            differing += 1
    assert differing > 0
