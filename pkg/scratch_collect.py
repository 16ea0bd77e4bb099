from metabug.minilang import parse_program
from metabug.minilang.printer import pretty_print
from metabug.collectors import collect_all, apply_race_links
from metabug.synthgen.interp import interpret, ProgramInput

NPD = """
proc main() {
    var cfg := read_input("k");
    var n := 0;
    if (cfg != null) {
        n := length(cfg);
    }
    var m := length(cfg);   # deref without the guard
}
"""

LEAK = """
proc main() {
    var f := open("a.txt");
    var g := open("b.txt");
    close(g);
    close(f);
}
"""

RACE = """
proc child(m: ref string) {
    m := null;
}
proc main() {
    var data := "ready";
    spawn child(data);
    if (data != null) {
        var n := length(data);
    }
}
"""

AIO_NFE = """
proc main() {
    var a := read_input("arr");
    var raw := read_input("num");
    var i := parseInt(raw);
    var x := a[i];
}
"""

for name, src in [("NPD", NPD), ("LEAK", LEAK), ("RACE", RACE), ("AIO+NFE", AIO_NFE)]:
    p = parse_program(src)
    res = collect_all(p)
    print(f"== {name} ==")
    for kind, slices in res.items():
        for ts in slices:
            print(f"  {kind}: bug_point={ts.bug_point} integral={ts.integral} key={ts.key}")
    print()

# NPD detail: slice program should still contain guard-free deref and drop the guarded one?
p = parse_program(NPD)
res = collect_all(p)
npd = res["NPD"]
for ts in npd:
    print(f"--- NPD slice key={ts.key} ---")
    print(ts.source())

# LEAK: only f leaks (close(f) after a may-fail open? no; close(f) is last => no leak for f?
# wait: close(g) precedes close(f); g opened then closed... but open("b.txt") may fail ->
# early exit leaks f! f's path to EXIT avoiding close(f): f-open -> g-open -(early)-> EXIT. leak(f).
# g: after g-open, close(g) dominates EXIT? normal path g->close(g)->close(f)->EXIT; no other
# may-fail in between => g never leaks.
leaks = res_leak = collect_all(parse_program(LEAK))["LEAK"]
print("LEAK keys:", [ts.key for ts in leaks])

# RACE detail
p = parse_program(RACE)
rs = collect_all(p)["RACE"]
for ts in rs:
    print(f"--- RACE slice key={ts.key} finding={ts.finding} ---")
    print(ts.source())
    g = ts.build_graph()
    from metabug.graph.pdg import EdgeKind
    links = [e for e in g.edges if e.kind == EdgeKind.DATA_DEP and
             g.nodes[e.src].proc != g.nodes[e.dst].proc]
    print("cross-proc data links:", [(e.src, e.dst) for e in links])
    # slice must still race under the adversarial schedule
    from metabug.synthgen.interp import replay
    out = interpret(ts.program, ProgramInput(values={}, failures=frozenset(), schedule=(0, 1, 0)))
    print("slice outcome under (0,1,0):", out.outcome, "trace:", out.trace)
