"""Mobility: introduction of action pairs from configurations, and the four commitments."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .canonical import CCell, CLoc, CMem, CanonicalState, max_bond
from .model import FuseConfig, PinchConfig, group_of
from .proteins import (
    StaleRedex, active_locations, get_loc, get_prots, match_groups, raw_well_formed,
    show_locref, update_loc,
)

log = logging.getLogger(__name__)

INTRO_KINDS = ("intro-p-in", "intro-p-out", "intro-f-hor", "intro-f-ver")
COMMIT_KINDS = ("pinch-in", "pinch-out", "fuse-hor", "fuse-ver")


@dataclass(frozen=True)
class MobilityRedex:
    kind: str
    config_id: str | None
    path: tuple  # location where the rule shape is rooted
    cells: tuple  # indices of the compartments involved, relative to ``path``
    placements: tuple = ()  # ((part, ref, occurrence indices), ...) for intros
    substitution: tuple = ()
    label: tuple | None = None  # the action name, for commits
    matched: tuple = field(default=(), compare=False)
    result: CLoc | None = field(default=None, compare=False, repr=False)
    fresh: tuple | None = field(default=None, compare=False)

    @property
    def location(self) -> str:
        return show_locref(("sys", self.path))

    def describe(self) -> str:
        tag = f"{self.kind}[{self.config_id}]" if self.config_id else self.kind
        return f"{tag}@{self.location}"


# --- fragment names -----------------------------------------------------------

def fragment_names(prots) -> set:
    """Names of a matched fragment that would stay free after closing it.

    Bonds with both ends inside the fragment can be restricted inside it;
    free names never can.
    """
    seen: dict = {}
    for p in prots:
        for s in p.sites:
            if s[0] in ("b", "f"):
                seen[s] = seen.get(s, 0) + 1
    return {l for l, k in seen.items() if l[0] == "f" or k == 1}


def _take(prots, idxs):
    return tuple(prots[i] for i in idxs)


def _drop(prots, idxs):
    idxs = set(idxs)
    return tuple(p for k, p in enumerate(prots) if k not in idxs)


def _merge_mem(a: CMem, b: CMem) -> CMem:
    return CMem(a.prots + b.prots, a.copinches + b.copinches, a.cofuses + b.cofuses)


def _merge_loc(a: CLoc, b: CLoc) -> CLoc:
    return CLoc(a.prots + b.prots, a.cells + b.cells, a.pinches + b.pinches, a.fuses + b.fuses)


def _set_cell(l: CLoc, i, cell: CCell) -> CLoc:
    cells = list(l.cells)
    cells[i] = cell
    return l._replace(cells=tuple(cells))


def _drop_cell(l: CLoc, i) -> CLoc:
    return l._replace(cells=l.cells[:i] + l.cells[i + 1:])


# --- introduction ------------------------------------------------------------

def _pinch_shapes(loc: CLoc, cfg: PinchConfig):
    gP, gPp, gS, gSp, gQ = (group_of(t) for t in (cfg.P, cfg.Pp, cfg.S, cfg.Sp, cfg.Q))
    for ref, _ in active_locations(loc):
        if ref[0] != "sys":
            continue
        path = ref[1]
        for i in range(len(get_loc(loc, path).cells)):
            outer, mem, inner = ("sys", path), ("mem", path, i), ("sys", path + (i,))
            yield "intro-p-in", path, (i,), [("P", gP, outer), ("P'", gPp, outer),
                                             ("S", gS, mem), ("S'", gSp, mem), ("Q", gQ, inner)]
            yield "intro-p-out", path, (i,), [("Q", gQ, outer), ("S", gS, mem), ("S'", gSp, mem),
                                              ("P", gP, inner), ("P'", gPp, inner)]


def _fuse_shapes(loc: CLoc, cfg: FuseConfig):
    gP, gS, gR, gT, gQ = (group_of(t) for t in (cfg.P, cfg.S, cfg.R, cfg.T, cfg.Q))
    for ref, _ in active_locations(loc):
        if ref[0] != "sys":
            continue
        path = ref[1]
        here = get_loc(loc, path)
        n = len(here.cells)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                yield "intro-f-hor", path, (i, j), [
                    ("P", gP, ("sys", path + (i,))), ("S", gS, ("mem", path, i)),
                    ("R", gR, ("sys", path)),
                    ("T", gT, ("mem", path, j)), ("Q", gQ, ("sys", path + (j,)))]
        for j in range(n):
            inner = path + (j,)
            for i in range(len(here.cells[j].body.cells)):
                yield "intro-f-ver", path, (j, i), [
                    ("T", gT, ("mem", path, j)), ("R", gR, ("sys", inner)),
                    ("P", gP, ("sys", inner + (i,))), ("S", gS, ("mem", inner, i)),
                    ("Q", gQ, ("sys", inner))]


def _apply_intro_raw(loc: CLoc, kind, path, cells, parts, n):
    """Rewrite ``loc`` for an intro; ``parts`` maps part name to (ref, occurrence indices)."""
    if kind in ("intro-p-in", "intro-p-out"):
        (i,) = cells
        pref, pidx = parts["P"]
        sref, sidx = parts["S"]
        moved_p = _take(get_prots(loc, pref), pidx)
        moved_s = _take(get_prots(loc, sref), sidx)

        def fix_mem(m: CMem) -> CMem:
            return m._replace(prots=_drop(m.prots, sidx),
                              copinches=m.copinches + ((n, CMem(moved_s)),))

        def fix_p(l: CLoc) -> CLoc:
            return l._replace(prots=_drop(l.prots, pidx), pinches=l.pinches + ((n, CLoc(moved_p)),))

        def outer(l: CLoc) -> CLoc:
            c = l.cells[i]
            if kind == "intro-p-in":
                l = fix_p(l)
                return _set_cell(l, i, CCell(fix_mem(c.mem), c.body))
            return _set_cell(l, i, CCell(fix_mem(c.mem), fix_p(c.body)))

        return update_loc(loc, path, outer)

    if kind == "intro-f-hor":
        i, j = cells

        def outer(l: CLoc) -> CLoc:
            moving, target = l.cells[i], l.cells[j]
            l = _set_cell(l, j, CCell(target.mem._replace(cofuses=target.mem.cofuses + (n,)),
                                      target.body))
            l = _drop_cell(l, i)
            return l._replace(fuses=l.fuses + ((n, moving),))

        return update_loc(loc, path, outer)

    j, i = cells

    def outer(l: CLoc) -> CLoc:
        target = l.cells[j]
        body = target.body
        moving = body.cells[i]
        body = _drop_cell(body, i)
        body = body._replace(fuses=body.fuses + ((n, moving),))
        return _set_cell(l, j, CCell(target.mem._replace(cofuses=target.mem.cofuses + (n,)), body))

    return update_loc(loc, path, outer)


def _side_conditions(kind, vals: dict, strict_fuse: bool) -> bool:
    fn = {k: fragment_names(v) for k, v in vals.items()}
    if kind.startswith("intro-p"):
        return fn["P"] <= fn["S"] and fn["S"] <= fn["P"] | fn["Q"]
    if strict_fuse:
        return fn["P"] <= fn["S"] and fn["Q"] <= fn["T"]
    return True


def find_intro_redexes(state: CanonicalState, cfg, *, strict_fuse=False) -> list[MobilityRedex]:
    """Introduction redexes for one configuration.

    Candidates whose result, or whose eventual commitment, would be
    ill-formed are dropped.
    """
    loc = state.root
    shapes = _pinch_shapes(loc, cfg) if isinstance(cfg, PinchConfig) else _fuse_shapes(loc, cfg)
    n = ("b", max_bond(loc) + 1)
    out, seen = [], set()
    for kind, path, cells, parts in shapes:
        spec = [(g, ref) for _, g, ref in parts]
        for occs, sub in match_groups(loc, spec):
            vals = {name: _take(get_prots(loc, ref), idxs)
                    for (name, _, ref), idxs in zip(parts, occs)}
            key = (kind, path, cells, tuple(tuple(sorted(v)) for v in vals.values()),
                   tuple(sorted(sub.items())))
            if key in seen:
                continue
            seen.add(key)
            if not _side_conditions(kind, vals, strict_fuse):
                continue
            named = {name: (ref, idxs) for (name, _, ref), idxs in zip(parts, occs)}
            result = _apply_intro_raw(loc, kind, path, cells, named, n)
            if not raw_well_formed(result):
                continue
            commits = [r for r in _commits(result) if r.label == n]
            if len(commits) != 1 or not raw_well_formed(commits[0].result):
                log.debug("intro %s at %s dropped: commitment would be ill-formed", kind, path)
                continue
            placements = tuple((name, ref, idxs) for (name, _, ref), idxs in zip(parts, occs))
            out.append(MobilityRedex(kind, cfg.id, path, cells, placements,
                                     tuple(sorted(sub.items())), None,
                                     tuple(vals[name] for name, _, _ in parts), result, n))
    return out


def apply_intro(state: CanonicalState, redex: MobilityRedex) -> CanonicalState:
    _check_fresh(state, redex)
    return CanonicalState.of_tree(redex.result)


def _check_fresh(state, redex):
    loc = state.root
    for (name, ref, idxs), vals in zip(redex.placements, redex.matched):
        try:
            now = get_prots(loc, ref)
        except IndexError:
            raise StaleRedex(f"{redex.describe()} does not belong to this state") from None
        if any(i >= len(now) or now[i] != v for i, v in zip(idxs, vals)):
            raise StaleRedex(f"{redex.describe()} does not belong to this state")


# --- commitment --------------------------------------------------------------

def _commits(loc: CLoc) -> list[MobilityRedex]:
    out = []
    for ref, _ in active_locations(loc):
        if ref[0] != "sys":
            continue
        path = ref[1]
        here = get_loc(loc, path)
        for i, c in enumerate(here.cells):
            for k, (lbl, cont_s) in enumerate(c.mem.copinches):
                for j, (plbl, cont_p) in enumerate(here.pinches):
                    if plbl == lbl:
                        out.append(_commit(loc, "pinch-in", path, (i, k, j), lbl))
                for j, (plbl, cont_p) in enumerate(c.body.pinches):
                    if plbl == lbl:
                        out.append(_commit(loc, "pinch-out", path, (i, k, j), lbl))
            for k, lbl in enumerate(c.mem.cofuses):
                for j, (flbl, _) in enumerate(here.fuses):
                    if flbl == lbl:
                        out.append(_commit(loc, "fuse-hor", path, (i, k, j), lbl))
                for j, (flbl, _) in enumerate(c.body.fuses):
                    if flbl == lbl:
                        out.append(_commit(loc, "fuse-ver", path, (i, k, j), lbl))
    return out


def _commit(loc: CLoc, kind, path, cells, lbl) -> MobilityRedex:
    i, k, j = cells

    def outer(l: CLoc) -> CLoc:
        c = l.cells[i]
        if kind == "pinch-in":
            cont_s = c.mem.copinches[k][1]
            cont_p = l.pinches[j][1]
            mem = c.mem._replace(copinches=c.mem.copinches[:k] + c.mem.copinches[k + 1:])
            body = c.body._replace(cells=c.body.cells + (CCell(cont_s, cont_p),))
            l = l._replace(pinches=l.pinches[:j] + l.pinches[j + 1:])
            return _set_cell(l, i, CCell(mem, body))
        if kind == "pinch-out":
            cont_s = c.mem.copinches[k][1]
            cont_p = c.body.pinches[j][1]
            mem = c.mem._replace(copinches=c.mem.copinches[:k] + c.mem.copinches[k + 1:])
            body = c.body._replace(pinches=c.body.pinches[:j] + c.body.pinches[j + 1:])
            l = _set_cell(l, i, CCell(mem, body))
            return l._replace(cells=l.cells + (CCell(cont_s, cont_p),))
        mem = c.mem._replace(cofuses=c.mem.cofuses[:k] + c.mem.cofuses[k + 1:])
        if kind == "fuse-hor":
            moving = l.fuses[j][1]
            l = l._replace(fuses=l.fuses[:j] + l.fuses[j + 1:])
            return _set_cell(l, i, CCell(_merge_mem(moving.mem, mem), _merge_loc(moving.body, c.body)))
        moving = c.body.fuses[j][1]
        body = c.body._replace(fuses=c.body.fuses[:j] + c.body.fuses[j + 1:])
        l = _set_cell(l, i, CCell(_merge_mem(moving.mem, mem), body))
        return _merge_loc(l, moving.body)

    return MobilityRedex(kind, None, path, cells, label=lbl, result=update_loc(loc, path, outer))


def find_commit_redexes(state: CanonicalState) -> list[MobilityRedex]:
    return _commits(state.root)


def apply_commit(state: CanonicalState, redex: MobilityRedex) -> CanonicalState:
    fresh = {r: r.result for r in _commits(state.root)}
    if redex not in fresh:
        raise StaleRedex(f"{redex.describe()} does not belong to this state")
    return CanonicalState.of_tree(fresh[redex])


def apply_mobility(state: CanonicalState, redex: MobilityRedex) -> CanonicalState:
    if redex.kind in INTRO_KINDS:
        return apply_intro(state, redex)
    return apply_commit(state, redex)
