"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or as ``python tests/test_acceptance.py``.
"""

import os
import random
import subprocess
import sys
import time

import pytest

from biobeta.canonical import canonicalize
from biobeta.gen import equiv_rewrite, mutate, random_wf_term
from biobeta.kappa import Bridge, Verdict, kappa_typecheck, translate
from biobeta.model import ANTIMONOTONE, MONOTONE, ProteinRule
from biobeta.parser import parse_spec, parse_term, parse_wide
from biobeta.printer import show_spec, show_system
from biobeta.proteins import RuleError, connected, validate_rule
from biobeta.query import parse_query
from biobeta.reduction import AuditError, ReactiveSystem
from biobeta.wellformed import try_typecheck, typecheck, wf_check

from conftest import ACCEPTANCE_LINES, corpus_path
from oracles import derivably_connected, small_wide_solutions


def report(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def system():
    return ReactiveSystem(parse_spec(open(corpus_path(), encoding="utf-8").read()), audit=False)


@pytest.fixture(scope="module")
def explored(system):
    """Depth-10 exploration of Main with every edge audited."""
    edges, violations = [], []

    def on_edge(src, redex, dst, _):
        try:
            system.audit_step(src, redex, dst)
        except AuditError as e:
            violations.append(str(e))
        edges.append((src, redex, dst))

    t0 = time.perf_counter()
    res = system.reachable(system.initial("Main"), depth=10, state_cap=10_000, on_edge=on_edge)
    return res, edges, violations, time.perf_counter() - t0


def test_c1_typing_soundness():
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    terms = [random_wf_term(rng, max_proteins=20, max_depth=4) for _ in range(500)]
    mutants = [mutate(t, rng)[0] for t in terms]
    disagree = bad_gen = ill = 0
    for t in terms:
        ok = wf_check(t).ok
        bad_gen += not ok
        disagree += ok != (try_typecheck(t) is not None)
    for m in mutants:
        ok = wf_check(m).ok
        ill += not ok
        disagree += ok != (try_typecheck(m) is not None)
    dt = time.perf_counter() - t0
    report("C1 typing soundness", disagree == 0 and bad_gen == 0 and dt < 30,
           f"{len(terms)} terms + {len(mutants)} mutants ({ill} ill-formed), "
           f"{disagree} disagreements, {bad_gen} ill-formed generated, {dt:.1f} s (limit 30 s)")


def test_c2_subject_congruence(system):
    spec = system.spec
    pool = list(spec.systems.values())
    pool += [s.term() for s in system.reachable(system.initial("Main"), depth=4).states]
    rng = random.Random(7)
    t0 = time.perf_counter()
    changed = 0
    applied = 0
    for _ in range(1000):
        t = rng.choice(pool)
        u, axiom = equiv_rewrite(t, rng)
        applied += axiom is not None
        changed += typecheck(u) != typecheck(t) or canonicalize(u) != canonicalize(t)
    dt = time.perf_counter() - t0
    report("C2 subject congruence", changed == 0 and applied == 1000 and dt < 10,
           f"{applied} rewrites over {len(pool)} terms, {changed} judgement changes, {dt:.1f} s (limit 10 s)")


def test_c3_subject_reduction(explored):
    res, edges, violations, dt = explored
    report("C3 subject reduction", not violations and dt < 120,
           f"{len(res)} states, {len(edges)} edges to depth 10, {len(violations)} violations, "
           f"{dt:.1f} s (limit 120 s)")


VESICLE = "compartment-exact(R0m, Sn0m; content: C0, R0e, Sn0e) & bound(C0.1, R0e.1)"
DELIVERY = ("compartment-exact(tSn0m, R0m, Sn0m; content: tSn0e, C0, R0e, Sn0e)"
            " & in-same-compartment(C0, tSn0e)")


@pytest.mark.parametrize("label, query", [("a detached vesicle", VESICLE), ("b delivery", DELIVERY)])
def test_c4_reachability(system, label, query):
    q = parse_query(query)
    t0 = time.perf_counter()
    res = system.reachable(system.initial("Main"), depth=14, state_cap=10_000, goal=q.holds)
    dt = time.perf_counter() - t0
    ok = res.found is not None and dt < 120
    if res.found is not None:
        witness = res.witness(res.found)
        print(witness.serialize())
        path = ", ".join(d for d, _ in witness.steps)
        detail = f"depth {len(witness)}: {path}"
    else:
        detail = "not found"
    report(f"C4{label}", ok, f"{detail} ({len(res)} states, {dt:.1f} s, limit 120 s)")


RULE_MUTANTS = [
    # (name, direction, small, big)
    ("rebind a bound site", MONOTONE, "< C0(1!w) * R0e(1v,2!x) | >", "new z. < C0(1!z) * R0e(1!z,2!x) | >"),
    ("unbind while binding", MONOTONE, "< R0c(1!x,2v) * Ad0(1v,2!w) * Cl(1!w) | >",
     "new y. < R0c(1!x,2!y) * Ad0(1!y,2v) * Cl(1v) | >"),
    ("created name once", MONOTONE, "< Ad0(1!x,2v) * Cl(1v) | >", "new y. < Ad0(1!x,2!y) * Cl(1v) | >"),
    ("created name three times", MONOTONE, "< Ad0(1v,2v) * Cl(1v) | >",
     "new y. < Ad0(1!y,2!y) * Cl(1!y) | >"),
    ("created name already free", MONOTONE, "< Ad0(1!y,2v) * Cl(1v) * C0(1!y) | >",
     "new y. < Ad0(1!y,2v) * Cl(1!y) * C0(1v) | >"),
    ("disconnected right side", MONOTONE, "< Ad0(1v,2v) * Cl(1v) ; C0(1v) | >",
     "new y. < Ad0(1v,2!y) * Cl(1!y) ; C0(1v) | >"),
    ("protein deleted", MONOTONE, "< Ad0(1!x,2v) * Cl(1v) * C0(1v) | >", "new y. < Ad0(1!x,2!y) * Cl(1!y) | >"),
    ("zone changed", MONOTONE, "< R0c(1!x,2v) * Ad0(1v,2h) | >", "new y. < R0c(1!x,2!y) | Ad0(1!y,2v) >"),
    ("anti rule that also binds", ANTIMONOTONE, "< Sn0c(1!x,2!w) * tSn0c(1v,2!w) | >",
     "new y. < Sn0c(1!x,2!y) * tSn0c(1!y,2v) | >"),
    ("free name lost", MONOTONE, "< R0c(1!x,2v) * Ad0(1v,2h) | >", "new y. < R0c(1v,2!y) * Ad0(1!y,2v) | >"),
]


def test_c5_rule_validation(system):
    spec = system.spec
    expected = {"rec": MONOTONE, "adpt": MONOTONE, "coat": MONOTONE, "snare": MONOTONE, "uncoat": ANTIMONOTONE}
    false_rejects = []
    for r in spec.protein_rules:
        try:
            validate_rule(r)
            if r.direction != expected[r.id.rstrip("01")]:
                false_rejects.append(f"{r.id} has direction {r.direction}")
        except RuleError as e:
            false_rejects.append(str(e))
    false_accepts = []
    for name, direction, small, big in RULE_MUTANTS:
        try:
            validate_rule(ProteinRule(name, direction, parse_wide(small), parse_wide(big)))
            false_accepts.append(name)
        except RuleError:
            pass
    report("C5 rule validation", not false_rejects and not false_accepts,
           f"{len(spec.protein_rules)} corpus rules ({len(false_rejects)} false rejects), "
           f"{len(RULE_MUTANTS)} mutants ({len(false_accepts)} false accepts{': ' if false_accepts else ''}"
           f"{', '.join(false_accepts)})")


def test_c6_connectedness_oracle():
    t0 = time.perf_counter()
    n = disagree = positives = 0
    for ws in small_wide_solutions(5):
        n += 1
        c = connected(ws)
        positives += c
        disagree += c != derivably_connected(ws)
    dt = time.perf_counter() - t0
    report("C6 connectedness oracle", disagree == 0 and dt < 60,
           f"{n} solutions ({positives} connected), {disagree} disagreements, {dt:.1f} s (limit 60 s)")


def test_c7_kappa_correspondence(system, explored):
    res, edges, _, _ = explored
    bridge = Bridge(system)
    verdicts = {v: 0 for v in Verdict}
    for src, redex, dst in edges:
        verdicts[bridge.check(src, redex, dst)] += 1
    terms = list(system.spec.systems.items())
    mismatched = []
    for name, t in terms:
        j, k = typecheck(t), kappa_typecheck(translate(t))
        if (j.gamma1, j.gamma2) != (k.gamma1, k.gamma2):
            mismatched.append(name)
    protein_edges = verdicts[Verdict.HOLDS] + verdicts[Verdict.FAILS]
    report("C7 kappa correspondence", verdicts[Verdict.FAILS] == 0 and protein_edges > 0 and not mismatched,
           f"{verdicts[Verdict.HOLDS]}/{protein_edges} protein edges hold "
           f"({verdicts[Verdict.NOT_PROTEIN_STEP]} membrane edges out of scope); "
           f"typing agrees on {len(terms) - len(mismatched)}/{len(terms)} corpus terms")


def test_c8_round_trip_and_determinism(system):
    spec = system.spec
    text = show_spec(spec)
    again = parse_spec(text)
    terms_ok = all(parse_term(show_system(t)) == t for t in spec.systems.values())
    round_trip = again == spec and show_spec(again) == text and terms_ok
    cmd = [sys.executable, "-m", "biobeta", "run", corpus_path(), "--strategy", "random", "--seed", "42"]
    outs = []
    for hashseed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        outs.append(subprocess.run(cmd, capture_output=True, env=env, check=True).stdout)
    same = outs[0] == outs[1] and len(outs[0]) > 0
    report("C8 determinism and round-trip", round_trip and same,
           f"corpus round-trip {'exact' if round_trip else 'BROKEN'}; two seeded runs "
           f"{'byte-identical' if same else 'DIFFER'} ({outs[0].count(b'#') - 1} steps)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
