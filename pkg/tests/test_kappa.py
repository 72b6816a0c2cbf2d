import itertools
import random

import pytest

from biobeta.canonical import canonicalize
from biobeta.gen import equiv_rewrite, random_wf_term
from biobeta.kappa import (
    Bridge, KGroup, KProt, KRes, KZero, KappaRule, KappaTypeError, Verdict, kappa_connected,
    kappa_equiv, kappa_grows, kappa_rule, kappa_step, kappa_typecheck, kappa_validate, kgroup,
    show_kappa, translate, try_kappa_typecheck,
)
from biobeta.parser import parse_term
from biobeta.proteins import GrowthError
from biobeta.wellformed import self_bond_lints, typecheck

T = lambda s: translate(parse_term(s))


def test_show_kappa():
    assert show_kappa(KZero()) == "0"
    assert show_kappa(T("A(1v,2!x)")) == "A(1v,2!x)"
    assert show_kappa(T("new x. [M(1!x)](A(1!x))")) == "(x)(M(1!x) , A(1!x))"


def test_translation_erases_actions():
    assert show_kappa(T("new n. (p(n): A(1v)) * [p'(n): 0](<>)")) == "(n)(A(1v) , 0 , 0)"


def test_kappa_typing_examples():
    j = kappa_typecheck(T("new x. A(1!x) * B(1!x)"))
    assert j.gamma1 == set() and j.gamma2 == set()
    with pytest.raises(KappaTypeError):
        kappa_typecheck(KProt("A", parse_term("A(1!x,2!x)").sites))


def test_syntax_prop_on_corpus(spec):
    for name, t in spec.systems.items():
        j, k = typecheck(t), kappa_typecheck(translate(t))
        assert (j.gamma1, j.gamma2) == (k.gamma1, k.gamma2), name


def test_syntax_prop_on_generated():
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        t = random_wf_term(rng)
        if self_bond_lints(t):
            # a self-bond is accepted here but not by the flat calculus
            assert try_kappa_typecheck(translate(t)) is None
            continue
        j, k = typecheck(t), kappa_typecheck(translate(t))
        # free action names have no counterpart once actions are erased
        acts = {a.name for a in j.tau}
        assert (j.gamma1 - acts, j.gamma2 - acts) == (k.gamma1, k.gamma2)
        checked += 1
    assert checked > 150


def test_kappa_typing_invariant_under_equivalence():
    rng = random.Random(12)
    for _ in range(300):
        t = random_wf_term(rng)
        u, _ = equiv_rewrite(t, rng)
        assert try_kappa_typecheck(translate(t)) == try_kappa_typecheck(translate(u))


def test_connected_and_growth():
    assert kappa_connected(T("A(1v)"))
    assert not kappa_connected(T("A(1v) * B(1v)"))
    assert kappa_connected(T("new x. A(1!x) * B(1!x)"))
    with pytest.raises(GrowthError):
        kappa_grows({"x"}, T("A(1!x) * B(1!x,2v)"), T("A(1!x) * B(1!x,2!y)"))


def test_translated_rules_validate(spec):
    for r in spec.protein_rules:
        kappa_validate(kappa_rule(r))


PAIR = KappaRule("pair", "monotone", kgroup(T("A(1v)"), T("B(1v)")), ("z",),
                 kgroup(T("A(1!z)"), T("B(1!z)")))


def test_kappa_step():
    assert kappa_step([PAIR], KZero()) == []
    lhs = T("D(1v) * A(1v,2!x) * [B(1!x,2!y)](C(1!y,2h))")
    rule = KappaRule("c", "monotone", T("D(1v) * A(1v,2!x) * C(1!y,2h) * B(1!x,2!y)"), ("z",),
                     T("D(1!z) * A(1!z,2!x) * C(1!y,2v) * B(1!x,2!y)"))
    rhs = T("new z. D(1!z) * A(1!z,2!x) * [B(1!x,2!y)](C(1!y,2v))")
    assert any(kappa_equiv(s, rhs) for s in kappa_step([rule], lhs))


def _brute(prots):
    # matches up to interchangeable (identical) proteins
    return len({(prots[a], prots[b]) for a, b in itertools.permutations(range(len(prots)), 2)
                if prots[a] == KProt("A", T("A(1v)").sites) and prots[b] == KProt("B", T("B(1v)").sites)})


@pytest.mark.parametrize("text, expected", [
    ("A(1v) * A(1v) * B(1v)", 1),
    ("A(1v) * B(1v) * B(1h)", 1),
    ("A(1h) * A(1v) * C(1v)", 0),
])
def test_match_count_brute_force(text, expected):
    from biobeta.kappa import kproteins

    s = T(text)
    assert len(kappa_step([PAIR], s)) == _brute(kproteins(s)) == expected


def test_bridge_on_traffic(traffic, main_state):
    bridge = Bridge(traffic)
    res = traffic.reachable(main_state, depth=5)
    seen = set()
    for s in res.states:
        for r in traffic.enabled(s):
            v = bridge.check(s, r)
            seen.add(v)
            assert v is (Verdict.HOLDS if r.is_protein else Verdict.NOT_PROTEIN_STEP)
    assert seen == {Verdict.HOLDS, Verdict.NOT_PROTEIN_STEP}


def test_converse_fails_across_membrane():
    from biobeta.model import MONOTONE, ProteinRule
    from biobeta.parser import parse_wide
    from biobeta.proteins import find_protein_redexes, validate_rule

    rule = ProteinRule("pair", MONOTONE, parse_wide("< A(1v) ; B(1v) | >"),
                       parse_wide("new z. < A(1!z) ; B(1!z) | >"))
    term = parse_term("A(1v) * [0](B(1v))")
    assert find_protein_redexes(canonicalize(term), validate_rule(rule)) == []
    assert len(kappa_step([kappa_rule(rule)], translate(term))) == 1


def test_kgroup_drops_zero():
    assert kgroup(KZero(), T("A(1v)")) == T("A(1v)")
    assert isinstance(kgroup(T("A(1v)"), T("B(1v)")), KGroup)
    assert isinstance(T("new x. A(1!x) * B(1!x)"), KRes)
