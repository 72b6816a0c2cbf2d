"""A small query language over states, used by ``reach``.

Atoms, joined with ``&``::

    in-same-compartment(A, B)          A and B share a system location
    bound(A.i, B.j)                    site i of some A is bonded to site j of some B
    compartment-with-membrane(M, N; content: A, B)
                                       a compartment whose membrane holds M, N and whose
                                       content holds A, B (at least)
    compartment-exact(M, N; content: A, B)
                                       as above, membrane and content exactly these proteins
    cargo-in-target(C, M)              C sits directly inside a compartment whose membrane holds M
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .canonical import CLoc, CanonicalState
from .proteins import active_locations, get_loc


class QueryError(ValueError):
    pass


_ATOM = re.compile(r"\s*([a-z][a-z-]*)\s*\((.*?)\)\s*$", re.S)


def _names(text):
    out = [t.strip() for t in text.split(",") if t.strip()]
    for t in out:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t):
            raise QueryError(f"bad protein name {t!r}")
    return out


def _site(text):
    m = re.fullmatch(r"\s*([A-Za-z_][A-Za-z0-9_]*)\.(\d+)\s*", text)
    if not m:
        raise QueryError(f"expected Name.site, got {text!r}")
    return m.group(1), int(m.group(2))


@dataclass(frozen=True)
class Atom:
    kind: str
    args: tuple

    def holds(self, loc: CLoc) -> bool:
        return _EVAL[self.kind](loc, *self.args)


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...]
    text: str

    def holds(self, state: CanonicalState | CLoc) -> bool:
        loc = state.root if isinstance(state, CanonicalState) else state
        return all(a.holds(loc) for a in self.atoms)


def parse_query(text: str) -> Query:
    atoms = []
    for part in text.split("&"):
        m = _ATOM.match(part)
        if not m:
            raise QueryError(f"cannot read query atom {part.strip()!r}")
        kind, body = m.group(1), m.group(2)
        if kind == "in-same-compartment":
            args = _names(body)
            if len(args) < 2:
                raise QueryError("in-same-compartment needs at least two proteins")
            atoms.append(Atom(kind, (tuple(args),)))
        elif kind == "bound":
            parts = body.split(",")
            if len(parts) != 2:
                raise QueryError("bound takes two sites")
            atoms.append(Atom(kind, (_site(parts[0]), _site(parts[1]))))
        elif kind in ("compartment-with-membrane", "compartment-exact"):
            mem, _, rest = body.partition(";")
            content = ()
            if rest:
                key, _, names = rest.partition(":")
                if key.strip() != "content":
                    raise QueryError("expected 'content:' after ';'")
                content = tuple(_names(names))
            atoms.append(Atom(kind, (tuple(_names(mem)), content)))
        elif kind == "cargo-in-target":
            args = _names(body)
            if len(args) != 2:
                raise QueryError("cargo-in-target takes a cargo and a membrane protein")
            atoms.append(Atom(kind, tuple(args)))
        else:
            raise QueryError(f"unknown query atom {kind!r}")
    return Query(tuple(atoms), text)


def _contains(prots, names) -> bool:
    have = Counter(p.name for p in prots)
    return all(have[n] >= k for n, k in Counter(names).items())


def _same(prots, names) -> bool:
    return Counter(p.name for p in prots) == Counter(names)


def _cells(loc):
    for ref, _ in active_locations(loc):
        if ref[0] == "mem":
            yield get_loc(loc, ref[1]).cells[ref[2]]


def _same_compartment(loc, names):
    return any(_contains(prots, names) for ref, prots in active_locations(loc) if ref[0] == "sys")


def _bound(loc, a, b):
    sites: dict = {}
    for _, prots in active_locations(loc):
        for p in prots:
            for i, s in enumerate(p.sites, 1):
                if s[0] in ("b", "f"):
                    sites.setdefault(s, []).append((p.name, i))
    for ends in sites.values():
        if len(ends) == 2 and (tuple(ends) == (a, b) or tuple(ends) == (b, a)):
            return True
    return False


def _with_membrane(loc, mem, content):
    return any(_contains(c.mem.prots, mem) and _contains(c.body.prots, content) for c in _cells(loc))


def _exact(loc, mem, content):
    return any(_same(c.mem.prots, mem) and not c.mem.copinches and not c.mem.cofuses
               and _same(c.body.prots, content) and not c.body.cells
               for c in _cells(loc))


def _cargo(loc, cargo, marker):
    return any(_contains(c.mem.prots, [marker]) and _contains(c.body.prots, [cargo]) for c in _cells(loc))


_EVAL = {
    "in-same-compartment": _same_compartment,
    "bound": _bound,
    "compartment-with-membrane": _with_membrane,
    "compartment-exact": _exact,
    "cargo-in-target": _cargo,
}
