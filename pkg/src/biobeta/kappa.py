"""The compartment-free protein calculus: solutions, typing, reactions, and the translation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .canonical import CLoc, CanonicalState, iter_proteins, raw_tree, render
from .model import ProteinRule, WideSolution
from .proteins import (
    CompiledRule, apply_protein_redex, connected, find_protein_redexes, solution_grows,
    validate_rule,
)
from .terms import (
    Cell, CoFuse, CoPinch, Empty, Fuse, Nu, Par, Pinch, Protein, Site, Star, Zero, interface_names,
    occurrence_count,
)


# --- solutions ----------------------------------------------------------------

@dataclass(frozen=True)
class KZero:
    pass


@dataclass(frozen=True)
class KProt:
    name: str
    sites: tuple[Site, ...]


@dataclass(frozen=True)
class KGroup:
    left: object
    right: object


@dataclass(frozen=True)
class KRes:
    name: str
    body: object


def kgroup(*parts):
    parts = [p for p in parts if not isinstance(p, KZero)]
    if not parts:
        return KZero()
    out = parts[0]
    for p in parts[1:]:
        out = KGroup(out, p)
    return out


def _site_text(i, s: Site) -> str:
    return f"{i}{s.kind}" if s.kind in ("v", "h") else f"{i}!{s.name}"


def show_kappa(s) -> str:
    if isinstance(s, KZero):
        return "0"
    if isinstance(s, KProt):
        return f"{s.name}(" + ",".join(_site_text(i, x) for i, x in enumerate(s.sites, 1)) + ")"
    if isinstance(s, KGroup):
        return f"{show_kappa(s.left)} , {show_kappa(s.right)}"
    if isinstance(s, KRes):
        return f"({s.name})({show_kappa(s.body)})"
    raise TypeError(f"not a solution: {s!r}")


def translate(term):
    """Erase compartments and actions; restrictions stay, even vacuous ones."""
    if isinstance(term, (Empty, Zero, CoFuse)):
        return KZero()
    if isinstance(term, Protein):
        return KProt(term.name, term.sites)
    if isinstance(term, (Par, Star)):
        return KGroup(translate(term.left), translate(term.right))
    if isinstance(term, Cell):
        return KGroup(translate(term.membrane), translate(term.body))
    if isinstance(term, Nu):
        return KRes(term.name, translate(term.body))
    if isinstance(term, (Pinch, CoPinch)):
        return translate(term.body)
    if isinstance(term, Fuse):
        return translate(term.cell)
    raise TypeError(f"not a term: {term!r}")


def kproteins(s) -> list[KProt]:
    if isinstance(s, KProt):
        return [s]
    if isinstance(s, KGroup):
        return kproteins(s.left) + kproteins(s.right)
    if isinstance(s, KRes):
        return kproteins(s.body)
    return []


def kfree_names(s) -> set[str]:
    if isinstance(s, KProt):
        return interface_names(s.sites)
    if isinstance(s, KGroup):
        return kfree_names(s.left) | kfree_names(s.right)
    if isinstance(s, KRes):
        return kfree_names(s.body) - {s.name}
    return set()


def _as_term(s):
    if isinstance(s, KZero):
        return Empty()
    if isinstance(s, KProt):
        return Protein(s.name, s.sites)
    if isinstance(s, KGroup):
        return Par(_as_term(s.left), _as_term(s.right))
    if isinstance(s, KRes):
        return Nu(s.name, _as_term(s.body))
    raise TypeError(f"not a solution: {s!r}")


def _of_term(t):
    if isinstance(t, Empty):
        return KZero()
    if isinstance(t, Protein):
        return KProt(t.name, t.sites)
    if isinstance(t, Par):
        return KGroup(_of_term(t.left), _of_term(t.right))
    if isinstance(t, Nu):
        return KRes(t.name, _of_term(t.body))
    raise TypeError(f"not a flat solution: {t!r}")


# --- structural equivalence ------------------------------------------------------

def kappa_canonical(s) -> CanonicalState:
    """Canonical form; vacuous restrictions vanish here, not in translation."""
    return CanonicalState.of_tree(raw_tree(_as_term(s)))


def flatten_tree(loc: CLoc) -> CLoc:
    """Tree-level translation: every protein of a state in one location."""
    return CLoc(tuple(iter_proteins(loc)))


def kappa_state(state: CanonicalState) -> CanonicalState:
    return CanonicalState.of_tree(flatten_tree(state.root))


def kappa_equiv(a, b) -> bool:
    return kappa_canonical(a) == kappa_canonical(b)


def solution_of_state(state: CanonicalState):
    return _of_term(render(state)[0])


# --- typing -----------------------------------------------------------------

class KappaTypeError(Exception):
    def __init__(self, rule: str, message: str):
        super().__init__(f"({rule}) {message}")
        self.rule = rule


@dataclass(frozen=True)
class KEnv:
    gamma1: frozenset
    gamma2: frozenset

    def __str__(self):
        return f"{', '.join(sorted(self.gamma1))}; {', '.join(sorted(self.gamma2))}"


def kappa_typecheck(s) -> KEnv:
    if isinstance(s, KZero):
        return KEnv(frozenset(), frozenset())
    if isinstance(s, KProt):
        names = interface_names(s.sites)
        for x in names:
            if occurrence_count(s.sites, x) >= 2:
                raise KappaTypeError("prot", f"{x} occurs twice on {s.name}")
        return KEnv(frozenset(names), frozenset())
    if isinstance(s, KRes):
        j = kappa_typecheck(s.body)
        if s.name in j.gamma1:
            raise KappaTypeError("res", f"restriction of {s.name} ties a single occurrence")
        return KEnv(j.gamma1, j.gamma2 - {s.name})
    if isinstance(s, KGroup):
        a, b = kappa_typecheck(s.left), kappa_typecheck(s.right)
        shared = a.gamma1 & b.gamma1
        g1, d1 = a.gamma1 - shared, b.gamma1 - shared
        if (g1 | a.gamma2) & (d1 | b.gamma2):
            raise KappaTypeError("par", "a name would occur more than twice")
        return KEnv(g1 | d1, a.gamma2 | b.gamma2 | shared)
    raise TypeError(f"not a solution: {s!r}")


def try_kappa_typecheck(s) -> KEnv | None:
    try:
        return kappa_typecheck(s)
    except KappaTypeError:
        return None


# --- connectedness, growth, rules ----------------------------------------------

def _single(s) -> WideSolution:
    return WideSolution((tuple(Protein(p.name, p.sites) for p in kproteins(s)),))


def kappa_connected(s) -> bool:
    """Connectivity of the bond graph (restricted names are distinct from free ones)."""
    loc = raw_tree(_as_term(s))
    flat = WideSolution((tuple(Protein(p.name, tuple(
        Site(x[0]) if x[0] in ("v", "h") else Site("b", f"{x[0]}{x[1]}") for x in p.sites))
        for p in loc.prots),))
    return connected(flat)


def kappa_grows(xs, small, big):
    return solution_grows(xs, _single(small), _single(big))


@dataclass(frozen=True)
class KappaRule:
    id: str
    direction: str
    small: object
    restricted: tuple
    big: object

    def as_protein_rule(self) -> ProteinRule:
        return ProteinRule(self.id, self.direction, _single(self.small),
                           WideSolution(_single(self.big).system_groups, (), self.restricted))

    def __str__(self):
        lhs, rhs = show_kappa(self.small), show_kappa(self.big)
        xs = "".join(f"({x})" for x in self.restricted)
        return f"{self.id}: {lhs} -> {xs}({rhs})" if xs else f"{self.id}: {lhs} -> {rhs}"


def kappa_rule(rule: ProteinRule) -> KappaRule:
    """Forget zones and groups: both sides become one solution."""
    return KappaRule(rule.id, rule.direction,
                     kgroup(*(KProt(p.name, p.sites) for p in rule.small.all_proteins())),
                     tuple(rule.big.restricted),
                     kgroup(*(KProt(p.name, p.sites) for p in rule.big.all_proteins())))


def kappa_validate(rule: KappaRule) -> CompiledRule:
    small = rule.small
    big = rule.big
    for x in reversed(rule.restricted):
        big = KRes(x, big)
    if try_kappa_typecheck(small) is None or try_kappa_typecheck(big) is None:
        raise ValueError(f"rule {rule.id}: sides must be graph-like")
    return validate_rule(rule.as_protein_rule())


def kappa_step_states(rules, state: CanonicalState) -> list[CanonicalState]:
    """All one-step successors of a flat state, as canonical states."""
    out = []
    for c in rules:
        for m in find_protein_redexes(state, c):
            out.append(apply_protein_redex(state, m, c))
    return out


def kappa_step(rules, s) -> list:
    compiled = [r if isinstance(r, CompiledRule) else kappa_validate(r) for r in rules]
    return [solution_of_state(t) for t in kappa_step_states(compiled, kappa_canonical(s))]


# --- correspondence -----------------------------------------------------------

class Verdict(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_PROTEIN_STEP = "not a protein step"


class Bridge:
    """Checks protein steps of a reactive system against the translated rules."""

    def __init__(self, system):
        self.system = system
        self.rules = [kappa_validate(kappa_rule(c.rule)) for c in system.rules]
        self._cache: dict = {}

    def successors(self, state: CanonicalState) -> set:
        k = kappa_state(state)
        if k not in self._cache:
            self._cache[k] = set(kappa_step_states(self.rules, k))
        return self._cache[k]

    def check(self, state: CanonicalState, redex, successor: CanonicalState | None = None) -> Verdict:
        from .reduction import Redex

        item = redex.item if isinstance(redex, Redex) else redex
        if not hasattr(item, "rule_id"):
            return Verdict.NOT_PROTEIN_STEP
        if successor is None:
            successor = self.system.apply(state, redex if isinstance(redex, Redex) else Redex(0, item))
        ok = kappa_state(successor) in self.successors(state)
        return Verdict.HOLDS if ok else Verdict.FAILS


def correspondence_check(system, state, redex) -> Verdict:
    return Bridge(system).check(state, redex)
