"""Random terms for property testing: well-formed by construction, mutants, and
single structural-equivalence rewrites."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .canonical import CCell, CLoc, CMem, CProt, HID, VIS, render
from .terms import (
    Cell, CoFuse, CoPinch, Empty, Fuse, NamePool, Nu, Par, Pinch, Protein, Signature, Site, Star,
    Zero, all_names, children, free_names,
)

SIGNATURE = Signature.of(polar={"A": 1, "B": 2, "C": 3}, apolar={"M": 1, "N": 2})
_POLAR = ("A", "B", "C")
_APOLAR = ("M", "N")


# --- positions -------------------------------------------------------------

def rebuild(term, kids):
    if isinstance(term, Par):
        return Par(*kids)
    if isinstance(term, Star):
        return Star(*kids)
    if isinstance(term, Cell):
        return Cell(*kids)
    if isinstance(term, Fuse):
        return Fuse(term.name, *kids)
    if isinstance(term, Nu):
        return Nu(term.name, kids[0])
    if isinstance(term, Pinch):
        return Pinch(term.name, kids[0])
    if isinstance(term, CoPinch):
        return CoPinch(term.name, kids[0])
    return term


def positions(term, pos=()):
    yield pos, term
    for i, c in enumerate(children(term)):
        yield from positions(c, pos + (i,))


def replace_at(term, pos, new):
    if not pos:
        return new
    kids = list(children(term))
    kids[pos[0]] = replace_at(kids[pos[0]], pos[1:], new)
    return rebuild(term, kids)


def is_membrane_position(term, pos) -> bool:
    """True when the subterm at ``pos`` is a membrane."""
    membrane = False
    t = term
    for i in pos:
        if isinstance(t, (Cell, Fuse)):
            membrane = i == 0
        t = children(t)[i]
    return membrane


def rename_free(term, x, y):
    if isinstance(term, Protein):
        return Protein(term.name, tuple(Site("b", y) if s.kind == "b" and s.name == x else s
                                        for s in term.sites))
    if isinstance(term, Nu) and term.name == x:
        return term
    kids = [rename_free(c, x, y) for c in children(term)]
    if isinstance(term, CoFuse):
        return CoFuse(y if term.name == x else term.name)
    if isinstance(term, (Pinch, CoPinch, Fuse)):
        return type(term)(y if term.name == x else term.name, *kids)
    return rebuild(term, kids)


# --- well-formed by construction ------------------------------------------------

@dataclass
class _MCell:
    id: int
    mem: list = field(default_factory=list)
    body: "_MLoc" = None


@dataclass
class _MLoc:
    prots: list = field(default_factory=list)
    cells: list = field(default_factory=list)


def _protein(rng, names):
    name = rng.choice(names)
    arity = SIGNATURE.arity(name)
    return [name, [rng.choice((VIS, VIS, HID)) for _ in range(arity)]]


def _build(rng, depth, max_depth, budget, ids):
    loc = _MLoc()
    for _ in range(rng.randint(0, 3)):
        if budget[0] <= 0:
            break
        loc.prots.append(_protein(rng, _POLAR))
        budget[0] -= 1
    if depth < max_depth:
        for _ in range(rng.choice((0, 0, 1, 1, 2))):
            if budget[0] <= 0:
                break
            c = _MCell(next(ids))
            for _ in range(rng.randint(0, 2)):
                if budget[0] <= 0:
                    break
                c.mem.append(_protein(rng, _APOLAR))
                budget[0] -= 1
            c.body = _build(rng, depth + 1, max_depth, budget, ids)
            loc.cells.append(c)
    return loc


def _slots(loc, enclosing=()):
    """Visible sites as ``(protein, index, enclosing cell ids, membrane-of id)``."""
    for p in loc.prots:
        for i, s in enumerate(p[1]):
            if s == VIS:
                yield p, i, frozenset(enclosing), None
    for c in loc.cells:
        for p in c.mem:
            for i, s in enumerate(p[1]):
                if s == VIS:
                    yield p, i, frozenset(enclosing), c.id
        yield from _slots(c.body, enclosing + (c.id,))


def _may_bond(a, b) -> bool:
    A, B = a[2], b[2]
    if len(A - B) > 1 or len(B - A) > 1:
        return False
    if A - B and b[3] not in A - B:
        return False
    if B - A and a[3] not in B - A:
        return False
    return not (a[0] is b[0] and a[1] == b[1])


def _freeze(loc: _MLoc) -> CLoc:
    prot = lambda p: CProt(p[0], tuple(p[1]))  # noqa: E731
    return CLoc(tuple(prot(p) for p in loc.prots),
                tuple(CCell(CMem(tuple(prot(p) for p in c.mem)), _freeze(c.body)) for c in loc.cells))


def _active_paths(loc: CLoc, path=()):
    yield path, loc
    for i, c in enumerate(loc.cells):
        yield from _active_paths(c.body, path + (i,))


def _update(loc: CLoc, path, fn) -> CLoc:
    if not path:
        return fn(loc)
    cells = list(loc.cells)
    c = cells[path[0]]
    cells[path[0]] = CCell(c.mem, _update(c.body, path[1:], fn))
    return loc._replace(cells=tuple(cells))


def _split(rng, items):
    keep, take = [], []
    for x in items:
        (take if rng.random() < 0.5 else keep).append(x)
    return tuple(keep), tuple(take)


def _enclosing(path) -> frozenset:
    return frozenset(path[:k] for k in range(1, len(path) + 1))


def _pair_ok(sys_path, mem_path, j, label) -> bool:
    """Can an action at ``sys_path`` pair with a co-action in membrane ``j`` at ``mem_path``?"""
    a = (None, 0, _enclosing(sys_path), None)
    b = (None, 1, _enclosing(mem_path), mem_path + (j,))
    if label[0] == "f" and a[2] & b[2]:
        return False
    return _may_bond(a, b)


def _add_actions(rng, loc: CLoc, next_id, free_prob=0.1) -> CLoc:
    def label(path):
        # a free action name must not sit inside any compartment
        k = next_id[0]
        next_id[0] += 1
        return ("f", f"a{k}") if not path and rng.random() < free_prob else ("b", k)

    def place(loc, path, n, co):
        targets = [(p, j) for p, l in _active_paths(loc) for j in range(len(l.cells))
                   if _pair_ok(path, p, j, n)]
        if targets:
            tp, j = rng.choice(targets)
            return _update(loc, tp, lambda l: _with_mem(l, j, co))
        return _update(loc, path, lambda l: l._replace(cells=l.cells + (CCell(co(CMem()), CLoc()),)))

    # fuses first: a fused compartment must not already carry actions
    for _ in range(rng.choice((0, 0, 1))):
        spots = [(p, l) for p, l in _active_paths(loc) if l.cells]
        if not spots:
            break
        path, here = rng.choice(spots)
        i = rng.randrange(len(here.cells))
        n = label(path)

        def move(l, i=i, n=n):
            return l._replace(cells=l.cells[:i] + l.cells[i + 1:], fuses=l.fuses + ((n, l.cells[i]),))

        loc = place(_update(loc, path, move), path, n,
                    lambda m, n=n: m._replace(cofuses=m.cofuses + (n,)))
    for _ in range(rng.choice((0, 1, 1, 2))):
        path, here = rng.choice(list(_active_paths(loc)))
        n = label(path)
        keep, take = _split(rng, here.prots)
        loc = _update(loc, path, lambda l, keep=keep, take=take, n=n: l._replace(
            prots=keep, pinches=l.pinches + ((n, CLoc(take)),)))

        def co(m, n=n):
            k2, t2 = _split(rng, m.prots)
            return m._replace(prots=k2, copinches=m.copinches + ((n, CMem(t2)),))

        loc = place(loc, path, n, co)
    return loc


def _with_mem(l: CLoc, j, fn) -> CLoc:
    cells = list(l.cells)
    cells[j] = CCell(fn(cells[j].mem), cells[j].body)
    return l._replace(cells=tuple(cells))


def random_wf_term(rng: random.Random, max_proteins=20, max_depth=4, rewrites=3):
    """A well-formed system built so that each condition holds by construction."""
    from itertools import count

    budget = [rng.randint(1, max_proteins)]
    mloc = _build(rng, 0, max_depth, budget, count())
    slots = list(_slots(mloc))
    rng.shuffle(slots)
    used = set()
    k = 0
    for ai, a in enumerate(slots):
        if (id(a[0]), a[1]) in used or rng.random() < 0.3:
            continue
        for b in slots[ai + 1:]:
            if (id(b[0]), b[1]) in used or not _may_bond(a, b):
                continue
            free = not (a[2] & b[2]) and rng.random() < 0.2
            lbl = ("f", f"x{k}") if free else ("b", k)
            a[0][1][a[1]] = lbl
            b[0][1][b[1]] = lbl
            used |= {(id(a[0]), a[1]), (id(b[0]), b[1])}
            k += 1
            break
    for a in slots:
        if (id(a[0]), a[1]) not in used and not a[2] and rng.random() < 0.1:
            a[0][1][a[1]] = ("f", f"u{k}")
            k += 1
    loc = _add_actions(rng, _freeze(mloc), [k])
    term = render(loc)[0]
    for _ in range(rng.randint(0, rewrites)):
        term, _ = equiv_rewrite(term, rng)
    return term


# --- single-defect mutants -----------------------------------------------------

MUTATIONS = ("graph-likeness", "impermeability", "action pairing", "action prefix", "site")


def mutate(term, rng: random.Random):
    """Apply one random local change aimed at one condition; returns ``(term, kind)``."""
    pool = NamePool(all_names(term), prefix="w")
    sysp = [(p, t) for p, t in positions(term) if not is_membrane_position(term, p)]
    for _ in range(20):
        kind = rng.choice(MUTATIONS)
        if kind == "graph-likeness":
            prots = [(p, t) for p, t in positions(term) if isinstance(t, Protein)]
            if not prots:
                continue
            p, t = rng.choice(prots)
            i = rng.randrange(len(t.sites))
            names = sorted(all_names(term))
            if names and rng.random() < 0.5:
                x = rng.choice(names)
                new = Protein(t.name, t.sites[:i] + (Site("b", x),) + t.sites[i + 1:])
                return replace_at(term, p, new), kind
            w = pool.fresh()
            new = Protein(t.name, t.sites[:i] + (Site("b", w),) + t.sites[i + 1:])
            if is_membrane_position(term, p):
                return replace_at(term, p, new), kind
            return replace_at(term, p, Nu(w, new)), kind
        if kind == "impermeability":
            cells = [(p, t) for p, t in sysp if isinstance(t, Cell)]
            if not cells:
                continue
            p, t = rng.choice(cells)
            w = pool.fresh()
            inner = Par(t.body, Protein("A", (Site("b", w),)))
            new = Nu(w, Par(Protein("A", (Site("b", w),)), Cell(t.membrane, inner)))
            return replace_at(term, p, new), kind
        if kind == "action pairing":
            acts = [t.name for _, t in positions(term) if isinstance(t, (Pinch, CoPinch, Fuse, CoFuse))]
            if not acts:
                continue
            n = rng.choice(acts)
            p, t = rng.choice(sysp)
            extra = Pinch(n, Empty()) if rng.random() < 0.5 else Cell(CoFuse(n), Empty())
            return replace_at(term, p, Par(t, extra)), kind
        if kind == "action prefix":
            pre = [(p, t) for p, t in positions(term) if isinstance(t, (Pinch, CoPinch))]
            if not pre:
                continue
            p, t = rng.choice(pre)
            w = pool.fresh()
            if isinstance(t, Pinch):
                new = Pinch(t.name, Par(t.body, Pinch(w, Empty())))
            else:
                new = CoPinch(t.name, Star(t.body, CoFuse(w)))
            return replace_at(term, p, new), kind
        prots = [(p, t) for p, t in positions(term) if isinstance(t, Protein)]
        if prots:
            p, t = rng.choice(prots)
            i = rng.randrange(len(t.sites))
            flip = Site("h") if t.sites[i].kind != "h" else Site("v")
            return replace_at(term, p, Protein(t.name, t.sites[:i] + (flip,) + t.sites[i + 1:])), kind
    return term, None


# --- structural-equivalence rewrites ---------------------------------------------

def _axioms(term, pos, t, membrane, pool_names):
    """Applicable ``(name, replacement)`` pairs at one position."""
    out = []
    if membrane:
        out.append(("star-unit-intro", Star(t, Zero())))
        if isinstance(t, Star):
            out.append(("star-comm", Star(t.right, t.left)))
            if isinstance(t.right, Zero):
                out.append(("star-unit-elim", t.left))
            if isinstance(t.right, Star):
                out.append(("star-assoc", Star(Star(t.left, t.right.left), t.right.right)))
            if isinstance(t.left, Star):
                out.append(("star-assoc-rev", Star(t.left.left, Star(t.left.right, t.right))))
        return out
    out.append(("par-unit-intro", Par(t, Empty())))
    if isinstance(t, Empty):
        out.append(("nu-empty-intro", Nu(_fresh(pool_names), Empty())))
    if isinstance(t, Par):
        out.append(("par-comm", Par(t.right, t.left)))
        if isinstance(t.right, Empty):
            out.append(("par-unit-elim", t.left))
        if isinstance(t.right, Par):
            out.append(("par-assoc", Par(Par(t.left, t.right.left), t.right.right)))
        if isinstance(t.left, Par):
            out.append(("par-assoc-rev", Par(t.left.left, Par(t.left.right, t.right))))
        if isinstance(t.left, Nu) and t.left.name not in free_names(t.right):
            out.append(("nu-par-rev", Nu(t.left.name, Par(t.left.body, t.right))))
    if isinstance(t, Cell) and isinstance(t.body, Nu) and t.body.name not in free_names(t.membrane):
        out.append(("nu-cell-rev", Nu(t.body.name, Cell(t.membrane, t.body.body))))
    if isinstance(t, Pinch) and isinstance(t.body, Nu) and t.body.name != t.name:
        out.append(("nu-prefix-rev", Nu(t.body.name, Pinch(t.name, t.body.body))))
    if isinstance(t, Nu):
        x, b = t.name, t.body
        y = _fresh(pool_names)
        out.append(("alpha", Nu(y, rename_free(b, x, y))))
        if isinstance(b, Empty):
            out.append(("nu-empty-elim", Empty()))
        if isinstance(b, Nu) and b.name != x:
            out.append(("nu-swap", Nu(b.name, Nu(x, b.body))))
        if isinstance(b, Par) and x not in free_names(b.right):
            out.append(("nu-par", Par(Nu(x, b.left), b.right)))
        if isinstance(b, Cell) and x not in free_names(b.membrane):
            out.append(("nu-cell", Cell(b.membrane, Nu(x, b.body))))
        if isinstance(b, Pinch) and b.name != x:
            out.append(("nu-prefix", Pinch(b.name, Nu(x, b.body))))
        if isinstance(b, Fuse) and b.name != x and x not in free_names(b.membrane):
            out.append(("nu-fuse", Fuse(b.name, b.membrane, Nu(x, b.body))))
    return out


def _fresh(used):
    return NamePool(used, prefix="r").fresh()


def equiv_rewrite(term, rng: random.Random):
    """One random structural-equivalence axiom applied at one random position."""
    used = all_names(term)
    cands = []
    for pos, t in positions(term):
        for name, new in _axioms(term, pos, t, is_membrane_position(term, pos), used):
            cands.append((pos, name, new))
    if not cands:
        return term, None
    pos, name, new = rng.choice(cands)
    return replace_at(term, pos, new), name
