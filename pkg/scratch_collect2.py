from metabug.minilang import parse_program
from metabug.collectors import collect_all
from metabug.synthgen.interp import interpret, ProgramInput

SRCS = {
"NPD": """
proc main() {
    var cfg := read_input("k");
    var n := 0;
    if (cfg != null) {
        n := length(cfg);
    }
    var m := length(cfg);
}
""",
"LEAK": """
proc main() {
    var f := open("a.txt");
    var g := open("b.txt");
    close(g);
    close(f);
}
""",
"RACE": """
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
""",
"AIO+NFE": """
proc main() {
    var a := read_input("arr");
    var raw := read_input("num");
    var i := parseInt(raw);
    var x := a[i];
}
""",
}

for name, src in SRCS.items():
    p = parse_program(src)
    for kind, slices in collect_all(p).items():
        for ts in slices:
            # slice source must re-parse (incl. resolution) without error
            reparsed = parse_program(ts.source())
            assert reparsed.main is not None
            print(f"{name} {ts.slice_id}: reparse ok, stmts kept "
                  f"{sorted(s.nid for pr in ts.program.procs for s in __import__('metabug.minilang.ast', fromlist=['statements']).proc_statements(pr))}")

# race slice must exhibit the race under the adversarial schedule
p = parse_program(SRCS["RACE"])
ts = collect_all(p)["RACE"][0]
res = interpret(ts.program, ProgramInput(values={}, failures=frozenset(), schedule=(0, 0, 0, 1)))
print("race slice outcome:", res.outcome, "trace:", res.trace)
assert res.outcome.kind == "race-window", res.outcome

# NPD slice must exhibit null deref when key missing
p = parse_program(SRCS["NPD"])
npd = [t for t in collect_all(p)["NPD"] if t.key == (2, 17)][0]
res = interpret(npd.program, ProgramInput(values={}, failures=frozenset()))
print("npd slice outcome:", res.outcome)
assert res.outcome.kind == "null-deref" and res.outcome.node == 17

# LEAK slice: f leaks when the second open fails... second open got sliced away?
leak = collect_all(parse_program(SRCS["LEAK"]))["LEAK"][0]
print("--- leak slice ---")
print(leak.source())
res = interpret(leak.program, ProgramInput(values={}, failures=frozenset()))
print("leak slice outcome (no failures):", res.outcome)
