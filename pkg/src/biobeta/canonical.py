"""Canonical representatives of structural-equivalence classes.

A state is a location tree.  Restricted names become integer bond ids and
explicit restrictions disappear; free names stay as strings.  Bond ids are
then renumbered canonically (colour refinement, individualising tied bonds
and keeping the least certificate) and every multiset is sorted, so two
well-formed systems are structurally equivalent exactly when their
canonical trees are equal.

Labels and sites are small tuples so that everything orders totally:
``("v", None)``, ``("h", None)``, ``("b", 3)`` for bond 3, ``("f", "x")``
for the free name ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import NamedTuple

from .terms import (
    Cell, CoFuse, CoPinch, Empty, Fuse, NamePool, Nu, Par, Pinch, Protein, Site, Star, Zero,
    nu, par, star,
)
from .printer import show_system

VIS = ("v", None)
HID = ("h", None)


class CProt(NamedTuple):
    name: str
    sites: tuple


class CMem(NamedTuple):
    prots: tuple = ()
    copinches: tuple = ()  # (label, CMem)
    cofuses: tuple = ()  # label


class CLoc(NamedTuple):
    prots: tuple = ()
    cells: tuple = ()  # CCell
    pinches: tuple = ()  # (label, CLoc)
    fuses: tuple = ()  # (label, CCell)


class CCell(NamedTuple):
    mem: CMem
    body: CLoc


EMPTY_LOC = CLoc()
EMPTY_MEM = CMem()


# --- term -> raw tree ---------------------------------------------------------

def _csite(site: Site, env: dict) -> tuple:
    if site.kind == "v":
        return VIS
    if site.kind == "h":
        return HID
    return env.get(site.name, ("f", site.name))


def label_of(name: str, env: dict) -> tuple:
    return env.get(name, ("f", name))


class _Builder:
    def __init__(self, ids=None):
        self.ids = ids or count()

    def loc(self, t, env, acc=None) -> CLoc:
        acc = acc if acc is not None else ([], [], [], [])
        self._fill(t, env, acc)
        return CLoc(*(tuple(x) for x in acc))

    def _fill(self, t, env, acc):
        prots, cells, pinches, fuses = acc
        if isinstance(t, Empty):
            return
        if isinstance(t, Protein):
            prots.append(CProt(t.name, tuple(_csite(s, env) for s in t.sites)))
        elif isinstance(t, Par):
            self._fill(t.left, env, acc)
            self._fill(t.right, env, acc)
        elif isinstance(t, Nu):
            self._fill(t.body, {**env, t.name: ("b", next(self.ids))}, acc)
        elif isinstance(t, Cell):
            cells.append(CCell(self.mem(t.membrane, env), self.loc(t.body, env)))
        elif isinstance(t, Pinch):
            pinches.append((label_of(t.name, env), self.loc(t.body, env)))
        elif isinstance(t, Fuse):
            fuses.append((label_of(t.name, env),
                          CCell(self.mem(t.membrane, env), self.loc(t.body, env))))
        else:
            raise TypeError(f"not a system term: {t!r}")

    def mem(self, t, env, acc=None) -> CMem:
        acc = acc if acc is not None else ([], [], [])
        self._fill_mem(t, env, acc)
        return CMem(*(tuple(x) for x in acc))

    def _fill_mem(self, t, env, acc):
        prots, copinches, cofuses = acc
        if isinstance(t, Zero):
            return
        if isinstance(t, Protein):
            prots.append(CProt(t.name, tuple(_csite(s, env) for s in t.sites)))
        elif isinstance(t, Star):
            self._fill_mem(t.left, env, acc)
            self._fill_mem(t.right, env, acc)
        elif isinstance(t, CoPinch):
            copinches.append((label_of(t.name, env), self.mem(t.body, env)))
        elif isinstance(t, CoFuse):
            cofuses.append(label_of(t.name, env))
        else:
            raise TypeError(f"not a membrane term: {t!r}")


def raw_tree(term) -> CLoc:
    return _Builder().loc(term, {})


# --- generic traversal ----------------------------------------------------------

def map_labels(loc: CLoc, f) -> CLoc:
    """Apply ``f`` to every label (bond or free) in sites and action residues."""

    def site(s):
        return s if s[0] in ("v", "h") else f(s)

    def prot(p):
        return CProt(p.name, tuple(site(s) for s in p.sites))

    def mem(m):
        return CMem(tuple(prot(p) for p in m.prots),
                    tuple((f(l), mem(c)) for l, c in m.copinches),
                    tuple(f(l) for l in m.cofuses))

    def cell(c):
        return CCell(mem(c.mem), go(c.body))

    def go(l):
        return CLoc(tuple(prot(p) for p in l.prots), tuple(cell(c) for c in l.cells),
                    tuple((f(lbl), go(b)) for lbl, b in l.pinches),
                    tuple((f(lbl), cell(c)) for lbl, c in l.fuses))

    return go(loc)


def sort_tree(loc: CLoc) -> CLoc:
    def mem(m):
        return CMem(tuple(sorted(m.prots)),
                    tuple(sorted((l, mem(c)) for l, c in m.copinches)),
                    tuple(sorted(m.cofuses)))

    def cell(c):
        return CCell(mem(c.mem), go(c.body))

    def go(l):
        return CLoc(tuple(sorted(l.prots)), tuple(sorted(cell(c) for c in l.cells)),
                    tuple(sorted((lbl, go(b)) for lbl, b in l.pinches)),
                    tuple(sorted((lbl, cell(c)) for lbl, c in l.fuses)))

    return go(loc)


def iter_labels(loc: CLoc):
    """Yield every label occurrence (bond ids and free names) in the tree."""
    out = []
    map_labels(loc, lambda l: out.append(l) or l)
    return out


def iter_proteins(loc: CLoc):
    """Every protein occurrence, frozen or not, membranes included."""

    def mem(m):
        yield from m.prots
        for _, c in m.copinches:
            yield from mem(c)

    def go(l):
        yield from l.prots
        for c in l.cells:
            yield from mem(c.mem)
            yield from go(c.body)
        for _, b in l.pinches:
            yield from go(b)
        for _, c in l.fuses:
            yield from mem(c.mem)
            yield from go(c.body)

    return go(loc)


def max_bond(loc: CLoc) -> int:
    ids = [l[1] for l in iter_labels(loc) if l[0] == "b"]
    return max(ids, default=-1)


# --- canonical labelling ------------------------------------------------------

def _kind(site) -> str:
    if site[0] == "f":
        return "f:" + site[1]
    return site[0]


class _Graph:
    def __init__(self, loc: CLoc):
        self.labels: list = []
        self.adj: list[list] = []
        self.bonds: dict[int, int] = {}
        self._loc(loc)

    def node(self, label) -> int:
        self.labels.append(label)
        self.adj.append([])
        return len(self.labels) - 1

    def edge(self, u, v, lbl):
        self.adj[u].append((lbl, "o", v))
        self.adj[v].append((lbl, "i", u))

    def link(self, u, label, lbl):
        if label[0] != "b":
            return
        b = self.bonds.get(label[1])
        if b is None:
            b = self.bonds[label[1]] = self.node(("bond",))
        self.edge(u, b, lbl)

    def _free(self, label) -> str:
        return label[1] if label[0] == "f" else ""

    def _prot(self, p: CProt) -> int:
        v = self.node(("prot", p.name, tuple(_kind(s) for s in p.sites)))
        for i, s in enumerate(p.sites):
            if s[0] == "b":
                self.link(v, s, f"s{i}")
        return v

    def _mem(self, m: CMem) -> int:
        v = self.node(("mem",))
        for p in m.prots:
            self.edge(v, self._prot(p), "has")
        for l, c in m.copinches:
            a = self.node(("copinch", self._free(l)))
            self.link(a, l, "act")
            self.edge(v, a, "copinch")
            self.edge(a, self._mem(c), "cont")
        for l in m.cofuses:
            a = self.node(("cofuse", self._free(l)))
            self.link(a, l, "act")
            self.edge(v, a, "cofuse")
        return v

    def _cell(self, c: CCell) -> int:
        v = self.node(("cell",))
        self.edge(v, self._mem(c.mem), "mem")
        self.edge(v, self._loc(c.body), "body")
        return v

    def _loc(self, l: CLoc) -> int:
        v = self.node(("loc",))
        for p in l.prots:
            self.edge(v, self._prot(p), "has")
        for c in l.cells:
            self.edge(v, self._cell(c), "cell")
        for lbl, b in l.pinches:
            a = self.node(("pinch", self._free(lbl)))
            self.link(a, lbl, "act")
            self.edge(v, a, "pinch")
            self.edge(a, self._loc(b), "cont")
        for lbl, c in l.fuses:
            a = self.node(("fuse", self._free(lbl)))
            self.link(a, lbl, "act")
            self.edge(v, a, "fuse")
            self.edge(a, self._cell(c), "cont")
        return v


def _ranks(values) -> list[int]:
    rank = {v: i for i, v in enumerate(sorted(set(values)))}
    return [rank[v] for v in values]


def _refine(g: _Graph, colors: list[int]) -> list[int]:
    classes = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted((e, d, colors[u]) for e, d, u in g.adj[v])))
                for v in range(len(colors))]
        new = _ranks(sigs)
        n = len(set(new))
        if n == classes:
            return new
        colors, classes = new, n


def canonical_tree(loc: CLoc) -> CLoc:
    """Renumber bond ids canonically and sort every multiset."""
    g = _Graph(loc)
    if not g.bonds:
        return sort_tree(loc)
    bond_nodes = [(bid, node) for bid, node in sorted(g.bonds.items())]
    best = None

    def certificate(colors):
        order = sorted(bond_nodes, key=lambda bn: colors[bn[1]])
        mapping = {bid: i for i, (bid, _) in enumerate(order)}
        return sort_tree(map_labels(loc, lambda l: ("b", mapping[l[1]]) if l[0] == "b" else l))

    def search(colors):
        nonlocal best
        colors = _refine(g, colors)
        groups: dict[int, list[int]] = {}
        for _, node in bond_nodes:
            groups.setdefault(colors[node], []).append(node)
        tied = [c for c, nodes in groups.items() if len(nodes) > 1]
        if not tied:
            cert = certificate(colors)
            if best is None or cert < best:
                best = cert
            return
        for node in groups[min(tied)]:
            branch = list(colors)
            branch[node] = -1
            search(branch)

    search(_ranks(g.labels))
    return best


@dataclass(frozen=True)
class CanonicalState:
    root: CLoc

    @classmethod
    def of_tree(cls, loc: CLoc) -> "CanonicalState":
        return cls(canonical_tree(loc))

    def render(self, **kw):
        return render(self, **kw)

    def text(self) -> str:
        return render(self)[1]

    def term(self):
        return render(self)[0]


def canonicalize(term) -> CanonicalState:
    return CanonicalState.of_tree(raw_tree(term))


def struct_equiv(a, b) -> bool:
    return canonicalize(a) == canonicalize(b)


# --- rendering ----------------------------------------------------------------

def occurrence_paths(loc: CLoc) -> dict:
    """Map each bond id to the system-location paths of its occurrences.

    Membrane occurrences belong to the location holding the compartment;
    prefix continuations and compartment contents are nested locations.
    """
    out: dict[int, list] = {}

    def note(label, path):
        if label[0] == "b":
            out.setdefault(label[1], []).append(path)

    def mem(m, path):
        for p in m.prots:
            for s in p.sites:
                note(s, path)
        for l, c in m.copinches:
            note(l, path)
            mem(c, path)
        for l in m.cofuses:
            note(l, path)

    def go(l, path):
        for p in l.prots:
            for s in p.sites:
                note(s, path)
        for i, c in enumerate(l.cells):
            mem(c.mem, path)
            go(c.body, path + (("c", i),))
        for j, (lbl, b) in enumerate(l.pinches):
            note(lbl, path)
            go(b, path + (("p", j),))
        for j, (lbl, c) in enumerate(l.fuses):
            note(lbl, path)
            mem(c.mem, path)
            go(c.body, path + (("f", j),))

    go(loc, ())
    return out


def _lca(paths):
    first = paths[0]
    n = len(first)
    for p in paths[1:]:
        n = min(n, len(p))
        for i in range(n):
            if p[i] != first[i]:
                n = i
                break
    return first[:n]


def render(state, *, open_bonds: dict | None = None):
    """Return ``(term, text)`` for a canonical state (or raw tree).

    Each restriction is placed at the least common ancestor location of its
    occurrences.  ``open_bonds`` maps bond ids to names left free.
    """
    loc = state.root if isinstance(state, CanonicalState) else state
    open_bonds = open_bonds or {}
    free = {l[1] for l in iter_labels(loc) if l[0] == "f"} | set(open_bonds.values())
    pool = NamePool(free, prefix="z")
    paths = occurrence_paths(loc)
    names = {}
    at: dict = {}
    for bid in sorted(paths):
        if bid in open_bonds:
            names[bid] = open_bonds[bid]
            continue
        names[bid] = pool.fresh()
        at.setdefault(_lca(paths[bid]), []).append(names[bid])

    def lname(label):
        return names[label[1]] if label[0] == "b" else label[1]

    def site(s):
        if s[0] == "v":
            return Site("v")
        if s[0] == "h":
            return Site("h")
        return Site("b", lname(s))

    def prot(p):
        return Protein(p.name, tuple(site(s) for s in p.sites))

    def mem(m):
        parts = [prot(p) for p in m.prots]
        parts += [CoPinch(lname(l), mem(c)) for l, c in m.copinches]
        parts += [CoFuse(lname(l)) for l in m.cofuses]
        return star(*parts)

    def go(l, path):
        parts = [prot(p) for p in l.prots]
        parts += [Cell(mem(c.mem), go(c.body, path + (("c", i),))) for i, c in enumerate(l.cells)]
        parts += [Pinch(lname(lbl), go(b, path + (("p", j),)))
                  for j, (lbl, b) in enumerate(l.pinches)]
        parts += [Fuse(lname(lbl), mem(c.mem), go(c.body, path + (("f", j),)))
                  for j, (lbl, c) in enumerate(l.fuses)]
        return nu(at.get(path, []), par(*parts))

    term = go(loc, ())
    return term, show_system(term)
