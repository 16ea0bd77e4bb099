"""Dependence graphs: construction, parameter vertices, slicing, meta node.

The data-dependence assertions are cross-checked against an independent
oracle that enumerates execution paths over the AST (loops taken at most
once, which is exact for the loop shapes used here) and collects the
reaching definition pairs by hand.
"""

from __future__ import annotations

import random
from collections import Counter

from metabug.graph import (
    AlreadyAttachedError, EdgeKind, NodeKind, SliceCriterion,
    attach_meta_node, backward_slice, build_ipdg, export_json,
    slice_statement_ids, strip_meta_node,
)
from metabug.minilang import ast as A
from metabug.minilang import parse_program, proc_statements
from metabug.synthgen import TEMPLATES, derive_rng, make_source

import pytest


# --- oracle: reaching def-use pairs by path enumeration -------------------------


def _stmt_defs(s):
    if isinstance(s, A.VarDecl):
        return s.target.name
    if isinstance(s, A.Assign) and isinstance(s.target, A.Var):
        return s.target.name
    return None


def _expr_vars(e):
    out = []
    for n in [e, *A.walk(e)]:
        if isinstance(n, A.Var):
            out.append(n.name)
    return out


def _stmt_uses(s):
    """Variables read by one statement (guard reads for if/while)."""
    if isinstance(s, A.VarDecl):
        return _expr_vars(s.value)
    if isinstance(s, A.Assign):
        used = _expr_vars(s.value)
        if isinstance(s.target, A.Index):
            used += [s.target.base.name, *_expr_vars(s.target.index)]
        return used
    if isinstance(s, (A.If, A.While)):
        return _expr_vars(s.cond)
    if isinstance(s, (A.CallStmt, A.SpawnStmt)):
        return [v for a in s.args for v in _expr_vars(a)]
    if isinstance(s, A.Return) and s.value is not None:
        return _expr_vars(s.value)
    return []


def _paths(body):
    """All execution paths as statement lists; loops run zero or one time."""
    seqs = [[]]
    for s in body:
        if isinstance(s, A.If):
            arms = []
            for arm in (s.then_body, s.else_body):
                for tail in _paths(arm):
                    arms.append([s] + tail)
            seqs = [a + b for a in seqs for b in arms]
        elif isinstance(s, A.While):
            # zero, one, and two iterations: two are needed to expose
            # loop-carried definitions flowing body-to-body
            arms = [[s]]
            bodies = _paths(s.body)
            for tail in bodies:
                arms.append([s] + tail + [s])
                for tail2 in bodies:
                    arms.append([s] + tail + [s] + tail2 + [s])
            seqs = [a + b for a in seqs for b in arms]
        else:
            seqs = [a + [s] for a in seqs]
    return seqs


def oracle_def_use_pairs(body) -> set[tuple[int, int, str]]:
    """(def stmt nid, use stmt nid, variable) reaching pairs over all paths."""
    pairs = set()
    for path in _paths(body):
        live: dict[str, int] = {}
        for s in path:
            for v in _stmt_uses(s):
                if v in live:
                    pairs.add((live[v], s.nid, v))
            d = _stmt_defs(s)
            if d is not None:
                live[d] = s.nid
    return pairs


def graph_def_use_pairs(program) -> set[tuple[int, int, str]]:
    g = build_ipdg(program)
    out = set()
    for e in g.edges:
        if e.kind != EdgeKind.DATA_DEP:
            continue
        s, t = g.nodes[e.src], g.nodes[e.dst]
        if s.stmt_nid is None or t.stmt_nid is None:
            continue  # parameter-vertex legs are checked separately
        if s.var is not None and s.var == t.var:
            out.add((s.stmt_nid, t.stmt_nid, s.var))
    return out


def test_straight_line_def_use():
    p = parse_program("proc main() { var x := 1; var y := x; }")
    pairs = graph_def_use_pairs(p)
    decl_x, decl_y = p.procs[0].body
    assert pairs == {(decl_x.nid, decl_y.nid, "x")}


def test_def_in_both_branches_yields_two_edges():
    p = parse_program("""
        proc main() {
            var x := 0;
            var c := read_input("c");
            if (c != null) { x := 1; } else { x := 2; }
            var y := x;
        }
    """)
    pairs = graph_def_use_pairs(p)
    assert pairs == oracle_def_use_pairs(p.procs[0].body)
    # ...and exactly two defs of x flow into y
    y = p.procs[0].body[-1]
    x_defs = {d for d, u, v in pairs if u == y.nid and v == "x"}
    assert len(x_defs) == 2


def test_loop_carried_definition_reaches_guard_and_use():
    p = parse_program("""
        proc main() {
            var i := 0;
            while (i < 10) { i := i + 1; }
            var j := i;
        }
    """)
    assert graph_def_use_pairs(p) == oracle_def_use_pairs(p.procs[0].body)


def test_random_programs_agree_with_path_oracle():
    rng = random.Random(4)
    for _ in range(40):
        stmts = ["var a := 1;", "var b := 2;"]
        for i in range(rng.randrange(2, 6)):
            pick = rng.randrange(4)
            if pick == 0:
                stmts.append(f"a := b + {i};")
            elif pick == 1:
                stmts.append(f"if (a > {i}) {{ b := a; }} else {{ a := {i}; }}")
            elif pick == 2:
                stmts.append(f"if (b > a) {{ a := a + 1; }}")
            else:
                stmts.append(f"var c{i} := a + b;")
        p = parse_program("proc main() { " + " ".join(stmts) + " }")
        assert graph_def_use_pairs(p) == oracle_def_use_pairs(p.procs[0].body)


# --- graph shape --------------------------------------------------------------


def test_while_loop_handle_shape():
    # a file handle read in a loop: the loop body is control-dependent on
    # the guard, and the handle flows from its open to the close
    p = parse_program("""
        proc main() {
            var zis := open("archive");
            var n := 0;
            while (n < 3) {
                n := n + 1;
            }
            close(zis);
        }
    """)
    g = build_ipdg(p)
    body = p.procs[0].body
    loop = body[2]
    assert isinstance(loop, A.While)
    ctrl = {(e.src, e.dst) for e in g.edges if e.kind == EdgeKind.CONTROL_DEP}
    assert (loop.nid, loop.body[0].nid) in ctrl
    data = graph_def_use_pairs(p)
    assert (body[0].nid, body[-1].nid, "zis") in data


def test_edge_kinds_respect_endpoint_constraints():
    for kind in TEMPLATES:
        src = make_source(kind, derive_rng(2, "shape", kind), buggy=True)
        g = build_ipdg(parse_program(src))
        for e in g.edges:
            if e.kind in (EdgeKind.CONTROL_DEP, EdgeKind.EXEC_ORDER):
                assert g.nodes[e.src].stmt_root
                assert g.nodes[e.dst].stmt_root
            elif e.kind == EdgeKind.DATA_DEP:
                assert g.nodes[e.src].kind == NodeKind.AST_LEAF
                assert g.nodes[e.dst].kind == NodeKind.AST_LEAF
            elif e.kind == EdgeKind.CALL:
                assert g.nodes[e.src].kind == NodeKind.CALL_SITE
                assert g.nodes[e.dst].kind == NodeKind.ENTRY
            elif e.kind == EdgeKind.PARAM_IN:
                assert g.nodes[e.src].kind == NodeKind.ACTUAL_IN
                assert g.nodes[e.dst].kind == NodeKind.FORMAL_IN
            elif e.kind == EdgeKind.PARAM_OUT:
                assert g.nodes[e.src].kind == NodeKind.FORMAL_OUT
                assert g.nodes[e.dst].kind == NodeKind.ACTUAL_OUT


def test_exec_order_chains_siblings_without_transitive_shortcuts():
    p = parse_program("""
        proc main() {
            var a := 1;
            var b := 2;
            var c := 3;
            var d := 4;
        }
    """)
    g = build_ipdg(p)
    order = [(e.src, e.dst) for e in g.edges if e.kind == EdgeKind.EXEC_ORDER]
    nids = [s.nid for s in p.procs[0].body]
    assert sorted(order) == [(nids[i], nids[i + 1]) for i in range(3)]


# --- parameter vertices ---------------------------------------------------------


CALLER = """
proc swap(array: ref array, j: int) {
    array[0] := j;
}

proc main() {
    var array := read_input("array");
    var j := 1;
    swap(array, j);
}
"""


def test_by_value_parameters_have_no_out_vertices():
    g = build_ipdg(parse_program(CALLER))
    kinds = Counter(n.kind for n in g.nodes.values())
    assert kinds[NodeKind.ACTUAL_IN] == 2
    assert kinds[NodeKind.FORMAL_IN] == 2
    # only the by-reference `array` gets the out pair
    assert kinds[NodeKind.ACTUAL_OUT] == 1
    assert kinds[NodeKind.FORMAL_OUT] == 1


def test_zero_parameter_call_is_callsite_plus_call_edge():
    p = parse_program("proc tick() { var t := 1; } proc main() { tick(); }")
    g = build_ipdg(p)
    calls = [e for e in g.edges if e.kind == EdgeKind.CALL]
    assert len(calls) == 1
    assert not [e for e in g.edges if e.kind in (EdgeKind.PARAM_IN, EdgeKind.PARAM_OUT)]
    assert g.nodes[calls[0].src].kind == NodeKind.CALL_SITE


def test_recursion_shares_one_entry():
    p = parse_program("""
        proc spin(n: int) {
            if (n > 0) { spin(n - 1); }
        }
        proc main() { spin(3); }
    """)
    g = build_ipdg(p)
    entries = [n for n in g.nodes.values() if n.kind == NodeKind.ENTRY]
    assert len(entries) == 2  # one per procedure, recursion adds none
    spin_entry = g.entry_of["spin"]
    call_edges = [e for e in g.edges if e.kind == EdgeKind.CALL and e.dst == spin_entry]
    assert len(call_edges) == 2  # main's call and the recursive one


# --- slicing -------------------------------------------------------------------


def test_slice_drops_independent_statement():
    p = parse_program("proc main() { var x := 1; var z := 2; var y := x; }")
    y = p.procs[0].body[2]
    g = build_ipdg(p)
    sliced = backward_slice(g, SliceCriterion(y.nid, ("x",)))
    texts = {type(s).__name__ + ":" + s.target.name
             for s in sliced.procs[0].body if isinstance(s, A.VarDecl)}
    assert "VarDecl:z" not in texts
    assert "VarDecl:x" in texts


def test_slice_crosses_byref_parameter_into_caller():
    p = parse_program(CALLER)
    target = p.procs[0].body[0]  # array[0] := j inside swap
    g = build_ipdg(p)
    kept = slice_statement_ids(g, SliceCriterion(target.nid, ("array", "j")))
    main_body = p.procs[1].body
    assert main_body[0].nid in kept  # var array := read_input(...)
    assert main_body[1].nid in kept  # var j := 1


def test_slice_of_slice_is_the_slice():
    for kind in TEMPLATES:
        src = make_source(kind, derive_rng(9, "idem", kind), buggy=True)
        p = parse_program(src)
        g = build_ipdg(p)
        stmt = list(proc_statements(p.procs[-1]))[-1]
        crit = SliceCriterion(stmt.nid, ())
        once = backward_slice(g, crit)
        twice = backward_slice(build_ipdg(once), crit)
        kept_once = {s.nid for pr in once.procs for s in proc_statements(pr)}
        kept_twice = {s.nid for pr in twice.procs for s in proc_statements(pr)}
        assert kept_once == kept_twice


# --- meta node -----------------------------------------------------------------


def test_meta_node_links_every_native_node():
    g = build_ipdg(parse_program("proc main() { var x := 1; var y := x; }"))
    n_native = len(g.nodes)
    attach_meta_node(g)
    links = [e for e in g.edges if e.kind == EdgeKind.META_LINK]
    assert len(links) == n_native
    assert all(e.src == g.meta_id for e in links)


def test_meta_node_attach_twice_raises():
    g = build_ipdg(parse_program("proc main() { var x := 1; }"))
    attach_meta_node(g)
    with pytest.raises(AlreadyAttachedError):
        attach_meta_node(g)


def test_attach_strip_restores_edge_multiset():
    g = build_ipdg(parse_program(CALLER))
    before = Counter(g.edges)
    attach_meta_node(g)
    strip_meta_node(g)
    assert Counter(g.edges) == before
    assert g.meta_id is None


def test_export_json_is_deterministic_and_sorted():
    p = parse_program(CALLER)
    a, b = export_json(build_ipdg(p)), export_json(build_ipdg(p))
    assert a == b
    ids = [n["id"] for n in a["nodes"]]
    assert ids == sorted(ids)
