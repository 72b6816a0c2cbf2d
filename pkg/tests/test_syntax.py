import random

import pytest

from biobeta.canonical import canonicalize, render, struct_equiv
from biobeta.gen import random_wf_term
from biobeta.parser import ParseError, SpecError, parse_membrane, parse_spec, parse_spec_with_diagnostics, parse_term
from biobeta.printer import show, show_spec, show_system
from biobeta.terms import (
    Action, Cell, Empty, NamePool, Nu, Par, Protein, fresh_name, free_names, occurrence_count,
    occurring_actions,
)


def test_parse_shapes():
    t = parse_term("A(1v) * <>")
    assert isinstance(t, Par) and isinstance(t.left, Protein) and isinstance(t.right, Empty)
    assert isinstance(parse_term("new x. A(1!x,2!x)"), Nu)
    assert isinstance(parse_term("[R0m(1!x,2!y)](C0(1v))"), Cell)


def test_star_binds_tighter_than_new():
    t = parse_term("new x. A(1!x) * B(1!x)")
    assert isinstance(t, Nu) and isinstance(t.body, Par)


def test_prefix_extends_right():
    t = parse_term("p(n): A(1v) * B(1v)")
    assert t.body == parse_term("A(1v) * B(1v)")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_term("A(1v) * (B(1v)")
    d = e.value.diagnostic
    assert d.line == 1 and d.column == 15


@pytest.mark.parametrize("text, expected", [
    ("A(1v)", set()),
    ("p(n): <>", {Action("pinch", "n")}),
    ("<> * <>", set()),
])
def test_occurring_actions(text, expected):
    assert occurring_actions(parse_term(text)) == expected


@pytest.mark.parametrize("text, expected", [
    ("new x. A(1!x,2!x)", set()),
    ("A(1!x) * B(1!y)", {"x", "y"}),
    ("p(n): <>", {"n"}),
])
def test_free_names(text, expected):
    assert free_names(parse_term(text)) == expected


def test_occurrence_count():
    a = parse_term("A(1!x,2!x)").sites
    assert occurrence_count(a, "x") == 2
    assert occurrence_count(parse_term("A(1v,2h)").sites, "x") == 0
    assert occurrence_count(parse_term("A(1!x,2!y)").sites, "y") == 1


def test_fresh_names():
    pool = NamePool({"x", "y"})
    a, b = fresh_name(pool), fresh_name(pool)
    assert a == "n0" and a != b and not {a, b} & {"x", "y"}


def test_struct_equiv_examples():
    closed = lambda t: parse_term(f"new x. {t}")
    assert struct_equiv(closed("A(1!x) * B(1!x)"), parse_term("new y. B(1!y) * A(1!y)"))
    assert not struct_equiv(parse_term("A(1v)"), parse_term("A(1h)"))
    assert not struct_equiv(parse_term("new x. A(1!x) * B(1!x)"), parse_term("A(1!x) * B(1!x)"))
    # free names are observable: the open pair is only equal to itself up to order
    assert struct_equiv(parse_term("A(1!x) * B(1!x)"), parse_term("B(1!x) * A(1!x)"))
    assert not struct_equiv(parse_term("A(1!x) * B(1!x)"), parse_term("B(1!y) * A(1!y)"))


def test_render_empty():
    assert render(canonicalize(parse_term("<> * <>")))[1] == "<>"


def test_canonical_render_is_stable():
    states = [canonicalize(parse_term(s)) for s in (
        "new x. [R(1!x)](C(1!x,2v)) * D(1v)", "D(1v) * new y. [R(1!y)](C(1!y,2v))")]
    assert states[0] == states[1]
    text = states[0].text()
    assert canonicalize(parse_term(text)) == states[0]


def test_membrane_round_trip():
    m = parse_membrane("f'(k), M(1v), p'(n): N(1!a,2v)")
    assert parse_membrane(show(m)) == m


def test_spec_corpus_inventory(spec, corpus_text):
    assert [len(spec.protein_rules), len(spec.pinch_configs), len(spec.fuse_configs), len(spec.systems)] \
        == [10, 2, 2, 4]
    _, diags = parse_spec_with_diagnostics(corpus_text)
    assert diags == []


def test_spec_round_trip(spec):
    text = show_spec(spec)
    again = parse_spec(text)
    assert again == spec and show_spec(again) == text


def test_term_round_trip_generated():
    rng = random.Random(7)
    for _ in range(200):
        t = random_wf_term(rng)
        assert parse_term(show_system(t)) == t


BASE = "signature { polar A: 1; polar Cl: 1; apolar M: 1; }\n"


def test_unknown_protein_single_diagnostic():
    _, diags = parse_spec_with_diagnostics(BASE + "rule r mono: < A(1v) ; Z(1v) | > -> new z. < A(1!z) ; Z(1!z) | >;")
    assert len(diags) == 1 and "Z" in diags[0].message and diags[0].section == "rule r"


def test_wrong_arity_diagnostic():
    _, diags = parse_spec_with_diagnostics(BASE + "system S = Cl(1v,2v);")
    assert len(diags) == 1 and diags[0].line == 2


def test_diagnostics_collected():
    text = BASE + "system S = Cl(1v,2v);\nsystem T = A(1v,2v);\nsystem S = A(1v);"
    _, diags = parse_spec_with_diagnostics(text)
    assert len(diags) == 3 and all(d.line > 1 for d in diags)


def test_semantic_rejection_is_positioned():
    with pytest.raises(SpecError) as e:
        parse_spec(BASE + "system S = new x. A(1!x);")
    (d,) = e.value.diagnostics
    assert d.section == "system S" and d.line == 2
