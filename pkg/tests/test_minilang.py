"""Frontend: parsing, printing, and the AST contracts everything rides on."""

from __future__ import annotations

import random
import re

import pytest

from metabug.minilang import (
    BUILTINS, MAY_FAIL, ParseError, ResolutionError, parse_program,
    pretty_print, structural_equal, walk_program,
)
from metabug.synthgen import TEMPLATES, derive_rng, make_source


def test_minimal_program():
    p = parse_program("proc main() { var x := 1; }")
    assert len(p.procs) == 1
    assert p.procs[0].name == "main"
    assert len(p.procs[0].body) == 1


def test_empty_source_rejected():
    with pytest.raises(ParseError):
        parse_program("")


def test_undeclared_call_names_the_culprit():
    # independent oracle: the declared names visible in the source
    src = "proc main() { foo(); }"
    declared = set(re.findall(r"proc\s+(\w+)", src)) | set(BUILTINS)
    assert "foo" not in declared
    with pytest.raises(ResolutionError, match="foo"):
        parse_program(src)


def test_diagnostics_carry_position():
    try:
        parse_program("proc main() {\n  var x := ;\n}")
    except ParseError as e:
        assert e.line == 2 and e.col > 0
    else:
        pytest.fail("expected a parse error")


def test_may_fail_builtins_are_exactly_open_and_parseint():
    assert {name for name, sig in BUILTINS.items() if sig.may_fail} == MAY_FAIL
    assert MAY_FAIL == {"open", "parseInt"}


def test_whitespace_does_not_change_the_ast():
    a = parse_program("proc main() { var x := 1; if (x > 0) { x := 2; } }")
    b = parse_program(
        "proc main()\n{\n\tvar x := 1;\n  if (x > 0)\n  {\n    x := 2;\n  }\n}\n")
    assert structural_equal(a, b)


def test_node_ids_unique():
    src = make_source("LEAK", random.Random(3), buggy=True)
    nids = [n.nid for n in walk_program(parse_program(src))]
    assert len(nids) == len(set(nids))


# --- round trips --------------------------------------------------------------


def test_roundtrip_is_a_fixed_point_on_generator_output():
    for kind in TEMPLATES:
        for buggy in (False, True):
            src = make_source(kind, derive_rng(5, "rt", kind, buggy), buggy=buggy)
            p1 = parse_program(src)
            printed = pretty_print(p1)
            p2 = parse_program(printed)
            assert structural_equal(p1, p2)
            assert pretty_print(p2) == printed  # printing is idempotent


def _random_nested_if(rng: random.Random, depth: int) -> str:
    """Emit a statement with adversarially nested if/else arms."""
    if depth == 0:
        return f"x := {rng.randrange(10)};"
    inner = _random_nested_if(rng, depth - 1)
    shape = rng.randrange(3)
    if shape == 0:
        return f"if (x > {rng.randrange(5)}) {{ {inner} }}"
    if shape == 1:
        return (f"if (x > {rng.randrange(5)}) {{ {inner} }} "
                f"else {{ x := {rng.randrange(10)}; }}")
    return (f"if (x > {rng.randrange(5)}) {{ x := 0; }} "
            f"else {{ {inner} }}")


def test_roundtrip_preserves_branch_association():
    # 1000 random nested if/else shapes; equality oracle is structural_equal,
    # which ignores ids and positions but not arm membership
    rng = random.Random(13)
    for _ in range(1000):
        body = " ".join(_random_nested_if(rng, rng.randrange(1, 5))
                        for _ in range(rng.randrange(1, 3)))
        p1 = parse_program("proc main() { var x := 1; " + body + " }")
        p2 = parse_program(pretty_print(p1))
        assert structural_equal(p1, p2)


def test_parser_assigns_ids_in_document_order():
    p = parse_program("proc main() { var a := 1; var b := 2; }")
    ids = [n.nid for n in walk_program(p)]
    assert ids == sorted(ids)
