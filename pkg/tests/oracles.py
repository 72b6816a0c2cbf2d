"""Independent reference deciders used by the test-suite."""

from __future__ import annotations

import itertools
from functools import lru_cache

from biobeta.model import WideSolution
from biobeta.terms import Protein, Site, interface_names

SITE_STATES = (Site("v"), Site("b", "x"), Site("b", "y"))
A_VARIANTS = tuple(Protein("A", s) for s in itertools.product(SITE_STATES, repeat=2))
B_VARIANTS = tuple(Protein("B", s) for s in itertools.product(SITE_STATES, repeat=2))


def _key(p: Protein):
    return (p.name, tuple((s.kind, s.name or "") for s in p.sites))


def _multisets(items, n):
    return itertools.combinations_with_replacement(items, n)


def _partitions(items):
    """Set partitions of a list of indices, blocks in first-element order."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _grouped(prots):
    out = set()
    for part in _partitions(list(range(len(prots)))):
        groups = [tuple(sorted((prots[i] for i in b), key=_key)) for b in part]
        out.add(tuple(sorted(groups, key=lambda g: [_key(p) for p in g])))
    return out


def small_wide_solutions(max_proteins=5):
    """Every wide solution over A (polar) and B (apolar), up to group order."""
    for n in range(1, max_proteins + 1):
        for na in range(n + 1):
            for sa in _multisets(A_VARIANTS, na):
                ga = _grouped(list(sa)) if sa else {()}
                for sb in _multisets(B_VARIANTS, n - na):
                    gb = _grouped(list(sb)) if sb else {()}
                    for sys in ga:
                        for mem in gb:
                            yield WideSolution(sys, mem)


_IDS: dict = {}
_MASKS: list[int] = []
_BITS: dict = {}


def _pid(p: Protein) -> int:
    k = _key(p)
    if k not in _IDS:
        mask = 0
        for x in interface_names(p.sites):
            mask |= 1 << _BITS.setdefault(x, len(_BITS))
        _IDS[k] = len(_MASKS)
        _MASKS.append(mask)
    return _IDS[k]


def _fn(groups) -> int:
    m = 0
    for _, g in groups:
        for q in g:
            m |= _MASKS[q]
    return m


def _canon(groups):
    return tuple(sorted((z, tuple(sorted(g))) for z, g in groups))


@lru_cache(maxsize=None)
def _derivable(groups, ordered: bool) -> bool:
    if len(groups) == 1 and len(groups[0][1]) == 1:
        return True
    # a single protein joins an existing group
    for gi, (zone, g) in enumerate(groups):
        if len(g) < 2:
            continue
        for qi in range(len(g)):
            rest = groups[:gi] + ((zone, g[:qi] + g[qi + 1:]),) + groups[gi + 1:]
            if _MASKS[g[qi]] & _fn(rest) and _derivable(rest if ordered else _canon(rest), ordered):
                return True
    # two solutions side by side
    n = len(groups)
    sys_ = [i for i in range(n) if groups[i][0] == "sys"]
    mem = [i for i in range(n) if groups[i][0] == "mem"]
    if ordered:
        cuts = [set(sys_[:a]) | set(mem[:b]) for a in range(len(sys_) + 1) for b in range(len(mem) + 1)]
    else:
        cuts = [{i for i in range(n) if mask >> i & 1} for mask in range(1, 2 ** n - 1)]
    for left in cuts:
        if not left or len(left) == n:
            continue
        lg = tuple(groups[i] for i in sorted(left))
        rg = tuple(groups[i] for i in range(n) if i not in left)
        if _fn(lg) & _fn(rg) and _derivable(lg, ordered) and _derivable(rg, ordered):
            return True
    return False


def derivably_connected(ws: WideSolution, *, ordered=False) -> bool:
    """Search for a derivation with the inductive connectedness rules.

    ``ordered=True`` only splits a solution into a prefix and a suffix of its
    groups within each zone; the default lets either side be any subsequence.
    """
    groups = tuple(("sys", tuple(map(_pid, g))) for g in ws.system_groups) + \
        tuple(("mem", tuple(map(_pid, g))) for g in ws.membrane_groups)
    if not groups or any(not g for _, g in groups):
        return False
    return _derivable(groups if ordered else _canon(groups), ordered)
