"""Candidate slice collection for the five bug kinds.

Leak candidates are cross-checked with a path oracle that enumerates
executions (both branch arms, loops at most once, early exit after any
failing call) and checks whether some execution opens a handle without
closing it.
"""

from __future__ import annotations

from metabug.collectors import BUG_KINDS, collect, collect_all
from metabug.minilang import ast as A, parse_program, proc_statements
from metabug.synthgen import TEMPLATES, derive_rng, make_source


NPD_SRC = """
proc main() {
    var msg := read_input("msg");
    var n := length(msg);
}
"""


def test_npd_collects_deref_of_input_value():
    slices = collect("NPD", parse_program(NPD_SRC))
    assert len(slices) == 1
    ts = slices[0]
    body = ts.program.procs[0].body
    assert ts.bug_kind == "NPD"
    assert ts.bug_point == body[1].nid  # the length() call reads msg
    assert ts.criterion.variables == ("msg",)
    assert body[0].nid in ts.integral  # where the maybe-null value came in


def test_npd_survives_flow_insensitive_reassignment():
    # the reassignment makes this a false alarm at runtime, but candidate
    # collection is syntactic; ranking is what separates real from fake
    p = parse_program("""
        proc main() {
            var msg := read_input("m");
            msg := "ok";
            var n := length(msg);
        }
    """)
    assert len(collect("NPD", p)) == 1


def test_npd_nothing_nullable_means_no_candidates():
    p = parse_program("proc main() { var a := 1; var b := a + 2; }")
    assert collect("NPD", p) == []


AIO_SRC = """
proc main() {
    var arr := read_input("arr");
    var i := 0;
    var stop := length(arr);
    while (i <= stop) {
        var v := arr[i];
        i := i + 1;
    }
}
"""


def test_aio_collects_indexed_read():
    slices = collect("AIO", parse_program(AIO_SRC))
    assert len(slices) == 1
    ts = slices[0]
    read = [s for s in ts.program.procs[0].body[3].body
            if isinstance(s, A.VarDecl)][0]
    assert ts.bug_point == read.nid
    assert ts.criterion.variables == ("arr", "i")


def test_aio_loop_increment_is_part_of_the_slice():
    ts = collect("AIO", parse_program(AIO_SRC))[0]
    kept = {type(s).__name__ for p in ts.program.procs for s in proc_statements(p)}
    assert "While" in kept  # the loop that drives i past the end survives slicing
    text = ts.source()
    assert "i := i + 1" in text


def test_aio_no_indexing_no_candidates():
    assert collect("AIO", parse_program(NPD_SRC)) == []


def test_nfe_parse_of_raw_input():
    p = parse_program("""
        proc main() {
            var raw := read_input("raw");
            var num := parseInt(raw);
        }
    """)
    slices = collect("NFE", p)
    assert len(slices) == 1
    assert slices[0].criterion.variables == ("raw",)
    assert slices[0].bug_point == p.procs[0].body[1].nid


def test_nfe_literal_argument_has_empty_criterion_vars():
    p = parse_program('proc main() { var n := parseInt("12"); }')
    slices = collect("NFE", p)
    assert len(slices) == 1
    assert slices[0].criterion.variables == ()


def test_nfe_absent_when_nothing_parses():
    assert collect("NFE", parse_program(NPD_SRC)) == []


# --- leaks, against a path oracle -----------------------------------------------


def _is_may_fail(s) -> bool:
    return any(isinstance(n, A.BuiltinCall) and n.name in A.MAY_FAIL
               for n in [s, *A.walk(s)])


def _open_var(s):
    if isinstance(s, A.VarDecl) and isinstance(s.value, A.BuiltinCall) \
            and s.value.name == "open":
        return s.target.name
    return None


def _close_var(s):
    if isinstance(s, A.CallStmt) and s.name == "close" and s.args \
            and isinstance(s.args[0], A.Var):
        return s.args[0].name
    return None


def _linear_paths(body):
    seqs = [[]]
    for s in body:
        if isinstance(s, A.If):
            arms = [[s] + t for arm in (s.then_body, s.else_body)
                    for t in _linear_paths(arm)]
            seqs = [a + b for a in seqs for b in arms]
        elif isinstance(s, A.While):
            arms = [[s]] + [[s] + t + [s] for t in _linear_paths(s.body)]
            seqs = [a + b for a in seqs for b in arms]
        else:
            seqs = [a + [s] for a in seqs]
    return seqs


def oracle_leaked_opens(program) -> set[int]:
    """Open statements that some execution leaves unclosed."""
    leaked = set()
    for path in _linear_paths(program.procs[-1].body):
        # every execution is a full path, or a prefix cut right after a
        # failing call (a failing open binds nothing, so skip cutting there
        # when judging that same open)
        cuts = [len(path)]
        cuts += [i + 1 for i, s in enumerate(path) if _is_may_fail(s)]
        for cut in cuts:
            run = path[:cut]
            failed_last = cut < len(path) or (run and _is_may_fail(run[-1]) and cut in cuts[1:])
            for i, s in enumerate(run):
                h = _open_var(s)
                if h is None:
                    continue
                if i == cut - 1 and cut != len(path):
                    continue  # this open itself failed: no handle to leak
                if not any(_close_var(t) == h for t in run[i + 1:]):
                    leaked.add(s.nid)
    return leaked


LEAKY = """
proc main() {
    var fh := open("data");
    var raw := read_input("raw");
    var num := parseInt(raw);
    close(fh);
}
"""


def test_leak_early_exit_between_open_and_close():
    p = parse_program(LEAKY)
    slices = collect("LEAK", p)
    assert [ts.bug_point for ts in slices] == sorted(oracle_leaked_opens(p))
    assert slices[0].bug_point == p.procs[0].body[0].nid
    assert slices[0].bug_point in slices[0].integral


def test_leak_not_collected_when_nothing_can_fail_inbetween():
    p = parse_program('proc main() { var fh := open("d"); close(fh); }')
    assert collect("LEAK", p) == []
    # the open itself can fail, but then there is no handle to lose
    assert oracle_leaked_opens(p) == set()


def test_leak_two_handles_only_the_leaked_one_flagged():
    p = parse_program("""
        proc main() {
            var a := open("first");
            close(a);
            var b := open("second");
            var raw := read_input("raw");
            var num := parseInt(raw);
            close(b);
        }
    """)
    slices = collect("LEAK", p)
    want = oracle_leaked_opens(p)
    assert {ts.bug_point for ts in slices} == want
    assert want == {p.procs[0].body[2].nid}


def test_leak_missing_close_on_one_branch():
    p = parse_program("""
        proc main() {
            var fh := open("data");
            var flag := read_input("flag");
            if (flag != null) {
                close(fh);
            }
        }
    """)
    got = {ts.bug_point for ts in collect("LEAK", p)}
    assert got == oracle_leaked_opens(p)
    assert got == {p.procs[0].body[0].nid}


def test_leak_oracle_agrees_on_every_template():
    for kind in TEMPLATES:
        for buggy in (True, False):
            src = make_source(kind, derive_rng(3, "leakcheck", kind), buggy=buggy)
            p = parse_program(src)
            got = {ts.bug_point for ts in collect("LEAK", p)}
            assert got == oracle_leaked_opens(p), (kind, buggy)


# --- races ----------------------------------------------------------------------


RACY = """
proc worker(box: ref array) {
    box[0] := 0;
}

proc main() {
    var box := read_input("box");
    spawn worker(box);
    if (box[0] != null) {
        var v := box[0];
    }
}
"""


def test_race_links_guard_in_spawner_to_write_in_spawned():
    p = parse_program(RACY)
    slices = collect("RACE", p)
    assert len(slices) == 1
    ts = slices[0]
    write = p.procs[0].body[0]
    spawned = p.procs[1].body[1]
    assert isinstance(spawned, A.SpawnStmt)
    assert ts.finding is not None
    assert ts.finding.variable == "box"
    assert ts.finding.procs == ("main", "worker")
    assert ts.bug_point == write.nid
    assert {write.nid, spawned.nid} <= set(ts.integral)
    # the guarded read that makes the window observable survives slicing
    assert "if (box[0]" in ts.source()


def test_race_needs_a_spawn():
    p = parse_program("""
        proc main() {
            var box := read_input("box");
            if (box[0] != null) {
                var v := box[0];
            }
        }
    """)
    assert collect("RACE", p) == []


def test_race_needs_a_writer_in_the_other_thread():
    p = parse_program("""
        proc worker(box: array) {
            var peek := box[0];
        }

        proc main() {
            var box := read_input("box");
            spawn worker(box);
            if (box[0] != null) {
                var v := box[0];
            }
        }
    """)
    assert collect("RACE", p) == []


def test_race_graph_gains_cross_thread_link():
    ts = collect("RACE", parse_program(RACY))[0]
    plain = len(ts.build_graph().edges)
    bare = collect("NPD", parse_program(RACY))  # unrelated kind, same program
    # the race finding adds edges tying the two threads together
    import metabug.graph as G
    unlinked = G.build_ipdg(ts.program)
    assert plain > len(unlinked.edges)


# --- cross-kind invariants --------------------------------------------------------


def _every_template_slice():
    for kind in TEMPLATES:
        src = make_source(kind, derive_rng(7, "inv", kind), buggy=True)
        p = parse_program(src)
        for found_kind, slices in collect_all(p).items():
            for ts in slices:
                yield found_kind, ts


def test_bug_point_sits_inside_the_integral_part():
    for kind, ts in _every_template_slice():
        assert ts.bug_point in ts.integral, (kind, ts.slice_id)


def test_integral_statements_survive_into_the_slice():
    for kind, ts in _every_template_slice():
        kept = {s.nid for p in ts.program.procs for s in proc_statements(p)}
        assert set(ts.integral) <= kept, (kind, ts.slice_id)


def test_collection_is_deterministic():
    for kind in TEMPLATES:
        src = make_source(kind, derive_rng(8, "det", kind), buggy=True)
        a = [ts.slice_id for ss in collect_all(parse_program(src)).values() for ts in ss]
        b = [ts.slice_id for ss in collect_all(parse_program(src)).values() for ts in ss]
        assert a == b


def test_collect_all_is_the_union_of_kinds():
    src = make_source("RACE", derive_rng(6, "union", "RACE"), buggy=True)
    p = parse_program(src)
    merged = collect_all(p)
    assert list(merged) == list(BUG_KINDS)
    for k in BUG_KINDS:
        assert [ts.slice_id for ts in merged[k]] == [ts.slice_id for ts in collect(k, p)]


def test_slice_id_names_origin_kind_and_key():
    ts = collect("NFE", parse_program("""
        proc main() {
            var raw := read_input("raw");
            var num := parseInt(raw);
        }
    """))[0]
    assert ts.slice_id == "prog:NFE:" + "-".join(str(k) for k in ts.key)
    ts.origin = "corpus/nfe/g0/buggy/0.mbl"
    assert ts.slice_id.startswith("corpus/nfe/g0/buggy/0.mbl:NFE:")


def test_manifest_carries_everything_needed_to_rebuild():
    for kind, ts in _every_template_slice():
        m = ts.to_manifest()
        assert m["bug_kind"] == kind or m["bug_kind"] in BUG_KINDS
        assert m["bug_point"] == ts.bug_point
        assert m["integral"] == list(ts.integral)
        assert m["criterion"]["stmt"] == ts.criterion.stmt_nid
        again = parse_program(m["source"])
        from metabug.minilang import structural_equal
        assert structural_equal(again, ts.program)
