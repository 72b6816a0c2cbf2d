"""Protein reactions: connectedness, the growing relation, rule validation, matching."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import product

from .canonical import (
    CCell, CLoc, CProt, CanonicalState, HID, VIS, max_bond, render,
)
from .model import ANTIMONOTONE, MONOTONE, ProteinRule, WideSolution
from .terms import Protein, Site, interface_names
from .wellformed import try_typecheck

log = logging.getLogger(__name__)


class RuleError(ValueError):
    pass


class GrowthError(ValueError):
    pass


class StaleRedex(RuntimeError):
    pass


# --- connectedness ------------------------------------------------------------

def connected(ws: WideSolution) -> bool:
    """True when the name-sharing graph over all proteins of ``ws`` is connected.

    Empty groups make a solution disconnected: the inductive definition only
    ever builds groups from proteins.
    """
    groups = [g for _, _, g in ws.groups()]
    if not groups or any(len(g) == 0 for g in groups):
        return False
    prots = [p for g in groups for p in g]
    names = [interface_names(p.sites) for p in prots]
    seen = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(len(prots)):
            if j not in seen and names[i] & names[j]:
                seen.add(j)
                frontier.append(j)
    return len(seen) == len(prots)


# --- growing relation -----------------------------------------------------------

UNCHANGED = "unchanged"


def interface_grows(xvec, rho, sigma) -> list[str]:
    """Site-by-site growth ``xvec |- rho > sigma``; raises GrowthError on the first bad site."""
    xvec = set(xvec)
    if len(rho) != len(sigma):
        raise GrowthError("interfaces differ in length")
    out = []
    for i, (a, b) in enumerate(zip(rho, sigma), 1):
        if a == b:
            if a.kind == "b" and a.name in xvec:
                raise GrowthError(f"site {i}: unchanged site uses created name {a.name}")
            out.append(UNCHANGED)
        elif a.kind == "h" and b.kind == "v":
            out.append("h->v")
        elif a.kind == "v" and b.kind == "h":
            out.append("v->h")
        elif a.kind == "v" and b.kind == "b" and b.name in xvec:
            out.append(f"v->!{b.name}")
        else:
            raise GrowthError(f"site {i}: {a} cannot grow into {b}")
    return out


@dataclass(frozen=True)
class GrowthWitness:
    # (zone, group index, small protein index, big protein index)
    aligned: tuple[tuple[str, int, int, int], ...]
    # (zone, group index, big protein index) of created proteins
    created: tuple[tuple[str, int, int], ...]
    changes: tuple[tuple[str, ...], ...]  # per aligned pair


def _align_group(xvec, small, big):
    """First injective alignment of ``small`` into ``big`` (by index) or None."""
    used = [False] * len(big)
    pairs: list[tuple[int, int, list[str]]] = []

    def go(i):
        if i == len(small):
            rest = [j for j in range(len(big)) if not used[j]]
            if all(interface_names(big[j].sites) <= xvec for j in rest):
                return rest
            return None
        for j, q in enumerate(big):
            if used[j] or q.name != small[i].name:
                continue
            try:
                ch = interface_grows(xvec, small[i].sites, q.sites)
            except GrowthError:
                continue
            used[j] = True
            pairs.append((i, j, ch))
            rest = go(i + 1)
            if rest is not None:
                return rest
            pairs.pop()
            used[j] = False
        return None

    rest = go(0)
    if rest is None:
        return None
    return list(pairs), rest


def solution_grows(xvec, small: WideSolution, big: WideSolution) -> GrowthWitness:
    """Decide ``xvec |- small > big`` and return a witness alignment."""
    xvec = set(xvec)
    if len(small.system_groups) != len(big.system_groups):
        raise GrowthError("system group counts differ")
    if len(small.membrane_groups) != len(big.membrane_groups):
        raise GrowthError("membrane group counts differ")
    clash = xvec & small.free_names()
    if clash:
        raise GrowthError(f"created names {sorted(clash)} already free on the small side")
    aligned, created, changes = [], [], []
    for (zone, gi, sg), (_, _, bg) in zip(small.groups(), big.groups()):
        res = _align_group(xvec, sg, bg)
        if res is None:
            raise GrowthError(f"{zone} group {gi} does not grow")
        pairs, rest = res
        for i, j, ch in pairs:
            aligned.append((zone, gi, i, j))
            changes.append(tuple(ch))
        created += [(zone, gi, j) for j in rest]
    if big.free_names() | xvec != small.free_names() | xvec or not xvec <= big.names():
        raise GrowthError("free names of the big side must be those of the small side plus the created ones")
    return GrowthWitness(tuple(aligned), tuple(created), tuple(changes))


@dataclass(frozen=True)
class CompiledRule:
    rule: ProteinRule
    witness: GrowthWitness

    @property
    def id(self):
        return self.rule.id


def validate_rule(rule: ProteinRule) -> CompiledRule:
    """Check (anti-)monotonicity; the anti-monotone case is the reversed pair."""
    if rule.direction not in (MONOTONE, ANTIMONOTONE):
        raise RuleError(f"rule {rule.id}: unknown direction {rule.direction!r}")
    if rule.small.restricted:
        raise RuleError(f"rule {rule.id}: the small side cannot restrict names")
    xs = rule.big.restricted
    if len(set(xs)) != len(xs):
        raise RuleError(f"rule {rule.id}: repeated created name")
    for x in xs:
        n = sum(1 for p in rule.big.all_proteins() for s in p.sites if s.name == x)
        if n != 2:
            raise RuleError(f"rule {rule.id}: created name {x} must occur exactly twice, found {n}")
    try:
        witness = solution_grows(xs, rule.small, rule.big.unrestricted())
    except GrowthError as e:
        raise RuleError(f"rule {rule.id}: not monotone: {e}") from None
    if not connected(rule.big):
        raise RuleError(f"rule {rule.id}: the big side is not connected")
    if not rule.small.all_proteins():
        log.warning("rule %s creates proteins from nothing", rule.id)
    return CompiledRule(rule, witness)


# --- locations in a state -------------------------------------------------------

def show_locref(ref) -> str:
    if ref[0] == "sys":
        return "/" + "/".join(f"c{i}" for i in ref[1])
    path, i = ref[1], ref[2]
    base = "/" + "".join(f"c{k}/" for k in path)
    return f"{base}c{i}.m"


def active_locations(loc: CLoc):
    """Yield ``(ref, protein tuple)`` for every location outside action prefixes.

    ``ref`` is ``("sys", path)`` or ``("mem", path, cell index)``.
    """

    def go(l, path):
        yield ("sys", path), l.prots
        for i, c in enumerate(l.cells):
            yield ("mem", path, i), c.mem.prots
            yield from go(c.body, path + (i,))

    return list(go(loc, ()))


def update_loc(loc: CLoc, path, fn) -> CLoc:
    if not path:
        return fn(loc)
    i = path[0]
    cells = list(loc.cells)
    c = cells[i]
    cells[i] = CCell(c.mem, update_loc(c.body, path[1:], fn))
    return loc._replace(cells=tuple(cells))


def update_mem(loc: CLoc, path, i, fn) -> CLoc:
    def inner(l):
        cells = list(l.cells)
        cells[i] = CCell(fn(cells[i].mem), cells[i].body)
        return l._replace(cells=tuple(cells))

    return update_loc(loc, path, inner)


def get_loc(loc: CLoc, path) -> CLoc:
    for i in path:
        loc = loc.cells[i].body
    return loc


def get_prots(loc: CLoc, ref):
    if ref[0] == "sys":
        return get_loc(loc, ref[1]).prots
    return get_loc(loc, ref[1]).cells[ref[2]].mem.prots


def edit_prots(loc: CLoc, ref, edits: dict, adds: list) -> CLoc:
    def fix(prots):
        out = [edits.get(k, p) for k, p in enumerate(prots)]
        return tuple(p for p in out if p is not None) + tuple(adds)

    if ref[0] == "sys":
        return update_loc(loc, ref[1], lambda l: l._replace(prots=fix(l.prots)))
    return update_mem(loc, ref[1], ref[2], lambda m: m._replace(prots=fix(m.prots)))


def raw_well_formed(loc: CLoc) -> bool:
    return try_typecheck(render(loc)[0]) is not None


# --- matching -----------------------------------------------------------------

def _site_match(rs: Site, ss, sub: dict, used: set, bound_only: set):
    """Extend ``sub`` so rule site ``rs`` matches state site ``ss``; None on failure."""
    if rs.kind == "v":
        return sub if ss == VIS else None
    if rs.kind == "h":
        return sub if ss == HID else None
    if ss[0] not in ("b", "f"):
        return None
    if rs.name in sub:
        return sub if sub[rs.name] == ss else None
    if ss in used:
        return None
    if rs.name in bound_only and ss[0] != "b":
        return None
    new = dict(sub)
    new[rs.name] = ss
    used.add(ss)
    return new


def match_protein(rp: Protein, sp: CProt, sub: dict, bound_only=frozenset()):
    if rp.name != sp.name or len(rp.sites) != len(sp.sites):
        return None
    used = set(sub.values())
    for rs, ss in zip(rp.sites, sp.sites):
        sub = _site_match(rs, ss, sub, used, bound_only)
        if sub is None:
            return None
    return sub


def match_groups(loc: CLoc, groups, sub=None, bound_only=frozenset()):
    """All ways to embed pattern groups at fixed locations.

    ``groups`` is a list of ``(pattern proteins, ref)``.  Occurrences are
    disjoint across groups; names map injectively to labels.  Yields
    ``(occurrence index tuples, substitution)``.
    """
    flat = [(gi, rp, ref) for gi, (pat, ref) in enumerate(groups) for rp in pat]
    taken: set = set()
    picks: list[int] = []
    prots_at = {ref: get_prots(loc, ref) for _, ref in groups}

    def go(k, sub):
        if k == len(flat):
            out, pos = [], 0
            for pat, _ in groups:
                out.append(tuple(picks[pos:pos + len(pat)]))
                pos += len(pat)
            yield tuple(out), sub
            return
        gi, rp, ref = flat[k]
        for idx, sp in enumerate(prots_at[ref]):
            if (ref, idx) in taken:
                continue
            s2 = match_protein(rp, sp, sub, bound_only)
            if s2 is None:
                continue
            taken.add((ref, idx))
            picks.append(idx)
            yield from go(k + 1, s2)
            picks.pop()
            taken.discard((ref, idx))

    yield from go(0, dict(sub or {}))


def instantiate(rp: Protein, sub: dict) -> CProt:
    sites = []
    for s in rp.sites:
        if s.kind == "v":
            sites.append(VIS)
        elif s.kind == "h":
            sites.append(HID)
        else:
            sites.append(sub[s.name])
    return CProt(rp.name, tuple(sites))


@dataclass(frozen=True)
class Match:
    rule_id: str
    placements: tuple  # ((zone, group index, ref, occurrence indices), ...)
    substitution: tuple  # sorted (rule name, label)
    matched: tuple = field(default=(), compare=False)  # protein values, for staleness
    result: CLoc | None = field(default=None, compare=False, repr=False)

    @property
    def location(self) -> str:
        return show_locref(self.placements[0][2]) if self.placements else "/"

    def describe(self) -> str:
        return f"{self.rule_id}@{self.location}"


def _lhs_groups(rule: ProteinRule):
    return list(rule.lhs.groups())


def _candidate_refs(loc: CLoc, zone: str, pattern):
    need: dict[str, int] = {}
    for p in pattern:
        need[p.name] = need.get(p.name, 0) + 1
    out = []
    for ref, prots in active_locations(loc):
        if ref[0] != zone:
            continue
        have: dict[str, int] = {}
        for p in prots:
            have[p.name] = have.get(p.name, 0) + 1
        if all(have.get(n, 0) >= k for n, k in need.items()):
            out.append(ref)
    return out


def _apply_raw(loc: CLoc, compiled: CompiledRule, placements, sub: dict) -> CLoc:
    rule, w = compiled.rule, compiled.witness
    edits: dict = {}
    adds: dict = {}
    where = {(zone, gi): ref for zone, gi, ref, _ in placements}
    occ = {(zone, gi): idxs for zone, gi, _, idxs in placements}
    if rule.direction == MONOTONE:
        sub = dict(sub)
        nxt = max_bond(loc) + 1
        for x in rule.created:
            sub[x] = ("b", nxt)
            nxt += 1
        for zone, gi, si, bi in w.aligned:
            ref = where[(zone, gi)]
            big = _group(rule.big, zone, gi)
            edits.setdefault(ref, {})[occ[(zone, gi)][si]] = instantiate(big[bi], sub)
        for zone, gi, bi in w.created:
            ref = where[(zone, gi)]
            adds.setdefault(ref, []).append(instantiate(_group(rule.big, zone, gi)[bi], sub))
    else:
        # the matched side is the big one; aligned proteins shrink, created ones vanish
        for zone, gi, si, bi in w.aligned:
            ref = where[(zone, gi)]
            small = _group(rule.small, zone, gi)
            edits.setdefault(ref, {})[occ[(zone, gi)][bi]] = instantiate(small[si], sub)
        for zone, gi, bi in w.created:
            ref = where[(zone, gi)]
            edits.setdefault(ref, {})[occ[(zone, gi)][bi]] = None
    for ref in set(edits) | set(adds):
        loc = edit_prots(loc, ref, edits.get(ref, {}), adds.get(ref, []))
    return loc


def _group(ws: WideSolution, zone: str, gi: int):
    return ws.system_groups[gi] if zone == "sys" else ws.membrane_groups[gi]


def find_protein_redexes(state: CanonicalState, compiled: CompiledRule, *, debug=False) -> list[Match]:
    """Every well-formed-result occurrence of the rule's left-hand side outside prefixes."""
    rule = compiled.rule
    loc = state.root
    groups = _lhs_groups(rule)
    bound_only = frozenset(rule.created) if rule.direction == ANTIMONOTONE else frozenset()
    cands = [_candidate_refs(loc, zone, g) for zone, _, g in groups]
    out: list[Match] = []
    seen = set()
    for refs in product(*cands):
        spec = [(g, ref) for (_, _, g), ref in zip(groups, refs)]
        for occs, sub in match_groups(loc, spec, bound_only=bound_only):
            placements = tuple((zone, gi, ref, idxs)
                               for (zone, gi, _), ref, idxs in zip(groups, refs, occs))
            matched = tuple(tuple(get_prots(loc, ref)[i] for i in idxs)
                            for ref, idxs in zip(refs, occs))
            key = (refs, tuple(tuple(sorted(m)) for m in matched),
                   tuple(sorted(sub.items())))
            if key in seen:
                continue
            seen.add(key)
            result = _apply_raw(loc, compiled, placements, sub)
            if not raw_well_formed(result):
                if debug:
                    log.debug("excluded %s at %s: result ill-formed", rule.id, refs)
                continue
            out.append(Match(rule.id, placements, tuple(sorted(sub.items())), matched, result))
    return out


def apply_protein_redex(state: CanonicalState, match: Match, compiled: CompiledRule) -> CanonicalState:
    loc = state.root
    for (zone, gi, ref, idxs), vals in zip(match.placements, match.matched):
        prots = get_prots(loc, ref)
        if any(i >= len(prots) or prots[i] != v for i, v in zip(idxs, vals)):
            raise StaleRedex(f"match {match.describe()} does not belong to this state")
    result = match.result
    if result is None:
        result = _apply_raw(loc, compiled, match.placements, dict(match.substitution))
    return CanonicalState.of_tree(result)
