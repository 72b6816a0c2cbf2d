import pytest

from biobeta.canonical import canonicalize, struct_equiv
from biobeta.model import ANTIMONOTONE, MONOTONE, ProteinRule
from biobeta.parser import parse_term, parse_wide
from biobeta.proteins import (
    GrowthError, RuleError, apply_protein_redex, connected, find_protein_redexes, interface_grows,
    solution_grows, validate_rule,
)
from oracles import derivably_connected


def rule(lhs, rhs, direction=MONOTONE, rid="r"):
    small, big = (lhs, rhs) if direction == MONOTONE else (rhs, lhs)
    return ProteinRule(rid, direction, parse_wide(small), parse_wide(big))


def sites(text):
    return parse_term(f"X({text})").sites


COMPLEX = rule("< D(1v) * A(1v,2!x) ; C(1!y,2h) | B(1!x,2!y) >",
               "new z. < D(1!z) * A(1!z,2!x) ; C(1!y,2v) | B(1!x,2!y) >")


@pytest.mark.parametrize("text, expected", [
    ("< A(1!x) | B(1!x,2v) >", True),
    ("< A(1!x) * B(1!y) | >", False),
    ("new z. < C(1!z) * Re(1!z,2!x) ; Rc(1!y,2v) | Rm(1!x,2!y) >", True),
    ("< A(1v) | >", True),
])
def test_connected(text, expected):
    ws = parse_wide(text)
    assert connected(ws) is expected
    assert derivably_connected(ws) is expected


def test_inductive_cut_depends_on_group_order():
    # path 3-1-4-2 laid out in the order 1,2,3,4: connected, but no prefix/suffix cut works
    ws = parse_wide("< A(1!p,2!q) ; A(1!r,2v) ; A(1!p,2v) ; A(1!q,2!r) | >")
    assert connected(ws)
    assert derivably_connected(ws)
    assert not derivably_connected(ws, ordered=True)


def test_interface_grows():
    assert interface_grows({"z"}, sites("1v,2h"), sites("1!z,2h")) == ["v->!z", "unchanged"]
    assert interface_grows(set(), sites("1h"), sites("1v")) == ["h->v"]
    with pytest.raises(GrowthError):
        interface_grows({"z"}, sites("1!y"), sites("1!z"))


def test_one_site_growth_is_exhaustive():
    # the only changes on a one-site interface are the toggles and binding a created name
    states = {"v": sites("1v"), "h": sites("1h"), "x": sites("1!x"), "z": sites("1!z")}
    ok = set()
    for a, ra in states.items():
        for b, rb in states.items():
            try:
                interface_grows({"z"}, ra, rb)
                ok.add(a + b)
            except GrowthError:
                pass
    assert ok == {"vv", "hh", "xx", "vh", "hv", "vz"}


def test_rec_witness(spec):
    r = spec.rule("rec0")
    w = solution_grows(r.created, r.small, r.big.unrestricted())
    flat = dict(zip([(z, g, i) for z, g, i, _ in w.aligned], w.changes))
    assert flat[("sys", 0, 0)] == ("v->!z",)
    assert flat[("sys", 0, 1)] == ("v->!z", "unchanged")
    assert flat[("sys", 1, 0)] == ("unchanged", "h->v")
    assert not w.created


def test_snare_witness(spec):
    r = spec.rule("snare0")
    w = solution_grows(r.created, r.small, r.big.unrestricted())
    assert sorted(w.changes) == [("unchanged", "v->!y"), ("v->!y", "unchanged")]


def test_identity_growth():
    ws = parse_wide("< A(1!x) | B(1!x,2v) >")
    w = solution_grows((), ws, ws)
    assert all(c == "unchanged" for ch in w.changes for c in ch)


def test_corpus_rules_validate(spec):
    dirs = {r.id: r.direction for r in spec.protein_rules}
    for r in spec.protein_rules:
        validate_rule(r)
    assert dirs["uncoat0"] == ANTIMONOTONE and dirs["rec1"] == MONOTONE


@pytest.mark.parametrize("lhs, rhs", [
    ("< A(1!x,2v) * B(1!x) * C(1v) | >", "new z. < A(1v,2!z) * B(1v) * C(1!z) | >"),
    ("< A(1v) * B(1v,2v) | >", "new z. < A(1!z) * B(1v,2!z) ; C(1v) | >"),
    ("< A(1v) | >", "new z. < A(1!z) ; C(1v) | >"),
    ("< A(1v) * B(1v) | >", "new z. < A(1!z) * B(1v) | >"),
])
def test_rejected_rules(lhs, rhs):
    with pytest.raises(RuleError):
        validate_rule(rule(lhs, rhs))


def test_disconnected_rhs_rejected():
    r = ProteinRule("r", MONOTONE, parse_wide("< A(1v) * B(1v) ; C(1v) | >"),
                    parse_wide("new z. < A(1!z) * B(1!z) ; C(1v) | >"))
    with pytest.raises(RuleError, match="connected"):
        validate_rule(r)


def test_nested_reaction():
    c = validate_rule(COMPLEX)
    s = canonicalize(parse_term("D(1v) * A(1v,2!x) * [B(1!x,2!y)](C(1!y,2h))"))
    (m,) = find_protein_redexes(s, c)
    after = apply_protein_redex(s, m, c)
    assert after == canonicalize(parse_term("new z. (D(1!z) * A(1!z,2!x) * [B(1!x,2!y)](C(1!y,2v)))"))


def test_inverted_nesting_same_reaction():
    c = validate_rule(COMPLEX)
    s = canonicalize(parse_term("C(1!y,2h) * [B(1!x,2!y)](D(1v) * A(1v,2!x))"))
    (m,) = find_protein_redexes(s, c)
    after = apply_protein_redex(s, m, c)
    assert after == canonicalize(parse_term("new z. (C(1!y,2v) * [B(1!x,2!y)](D(1!z) * A(1!z,2!x)))"))


def test_no_match_on_hidden():
    c = validate_rule(rule("< A(1v) * B(1v) | >", "new z. < A(1!z) * B(1!z) | >"))
    assert find_protein_redexes(canonicalize(parse_term("A(1h) * B(1v)")), c) == []


def test_frozen_region_not_matched():
    c = validate_rule(rule("< A(1v) * B(1v) | >", "new z. < A(1!z) * B(1!z) | >"))
    s = canonicalize(parse_term("new n. (p(n): A(1v) * B(1v)) * [p'(n): 0](<>)"))
    assert find_protein_redexes(s, c) == []
    s = canonicalize(parse_term("new n. (p(n): A(1v) * B(1v)) * [p'(n): 0](<>) * A(1v) * B(1v)"))
    assert len(find_protein_redexes(s, c)) == 1


def test_matches_distinct_occurrences():
    c = validate_rule(rule("< A(1v) * B(1v) | >", "new z. < A(1!z) * B(1!z) | >"))
    s = canonicalize(parse_term("A(1v) * A(1v) * B(1v)"))
    ms = find_protein_redexes(s, c)
    # the two A's are interchangeable proteins: distinct occurrences, one resulting state
    assert len({apply_protein_redex(s, m, c) for m in ms}) == 1


def test_uncoat_removes_bond(spec, traffic):
    c = next(r for r in traffic.rules if r.id == "uncoat0")
    s = canonicalize(parse_term("new x,y,z. R0c(1!x,2!y) * Ad0(1!y,2!z) * Cl(1!z) * R0m(1!x,2v)"))
    (m,) = find_protein_redexes(s, c)
    after = apply_protein_redex(s, m, c)
    assert after == canonicalize(parse_term("new x,z. R0c(1!x,2v) * Ad0(1v,2!z) * Cl(1!z) * R0m(1!x,2v)"))


def test_apply_then_reverse(traffic):
    coat = next(r for r in traffic.rules if r.id == "coat0")
    back = validate_rule(ProteinRule("back", ANTIMONOTONE, coat.rule.small, coat.rule.big))
    s = canonicalize(parse_term("new x. R0c(1!x,2v) * Ad0(1!x,2v) * Cl(1v)"))
    (m,) = find_protein_redexes(s, coat)
    mid = apply_protein_redex(s, m, coat)
    (m2,) = find_protein_redexes(mid, back)
    assert struct_equiv(apply_protein_redex(mid, m2, back).term(), s.term())
