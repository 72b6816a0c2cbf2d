"""Term representation for systems and membranes.

Systems float in aqueous space and may contain polar proteins, compartments,
restrictions and the two system-side prefixes ``p(n):`` and ``f(n):``.
Membranes are collections of apolar proteins plus the co-actions
``p'(n):`` and ``f'(n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

POLAR = "polar"
APOLAR = "apolar"


class SignatureError(ValueError):
    """A protein occurrence disagrees with the signature."""


@dataclass(frozen=True)
class Signature:
    entries: tuple[tuple[str, str, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for name, polarity, arity in self.entries:
            if name in seen:
                raise SignatureError(f"duplicate protein {name!r}")
            if polarity not in (POLAR, APOLAR):
                raise SignatureError(f"bad polarity {polarity!r} for {name!r}")
            if arity < 1:
                raise SignatureError(f"arity of {name!r} must be positive")
            seen.add(name)

    @classmethod
    def of(cls, polar: dict[str, int] | None = None, apolar: dict[str, int] | None = None) -> "Signature":
        entries = [(n, POLAR, a) for n, a in (polar or {}).items()]
        entries += [(n, APOLAR, a) for n, a in (apolar or {}).items()]
        return cls(tuple(entries))

    def __contains__(self, name: str) -> bool:
        return any(e[0] == name for e in self.entries)

    def lookup(self, name: str) -> tuple[str, int]:
        for n, polarity, arity in self.entries:
            if n == name:
                return polarity, arity
        raise SignatureError(f"unknown protein {name!r}")

    def polarity(self, name: str) -> str:
        return self.lookup(name)[0]

    def arity(self, name: str) -> int:
        return self.lookup(name)[1]

    def names(self) -> list[str]:
        return [e[0] for e in self.entries]


# --- interfaces -------------------------------------------------------------

@dataclass(frozen=True)
class Site:
    kind: str  # "v" visible, "h" hidden, "b" bound
    name: str | None = None

    def __post_init__(self):
        if self.kind not in ("v", "h", "b"):
            raise ValueError(f"bad site kind {self.kind!r}")
        if (self.kind == "b") != (self.name is not None):
            raise ValueError("bound sites carry a name, free sites do not")

    def __str__(self):
        return "!" + self.name if self.kind == "b" else self.kind


VISIBLE = Site("v")
HIDDEN = Site("h")


def bound(name: str) -> Site:
    return Site("b", name)


Interface = tuple[Site, ...]


def occurrence_count(rho: Iterable[Site], x: str) -> int:
    """Number of sites of ``rho`` bound to ``x``."""
    return sum(1 for s in rho if s.kind == "b" and s.name == x)


def interface_names(rho: Iterable[Site]) -> set[str]:
    return {s.name for s in rho if s.kind == "b"}


# --- actions ----------------------------------------------------------------

_DUAL = {"pinch": "copinch", "copinch": "pinch", "fuse": "cofuse", "cofuse": "fuse"}
_SHOW = {"pinch": "p", "copinch": "p'", "fuse": "f", "cofuse": "f'"}


@dataclass(frozen=True, order=True)
class Action:
    kind: str
    name: str

    def __post_init__(self):
        if self.kind not in _DUAL:
            raise ValueError(f"bad action kind {self.kind!r}")

    def co(self) -> "Action":
        return Action(_DUAL[self.kind], self.name)

    def __str__(self):
        return f"{_SHOW[self.kind]}_{self.name}"


def coactions(actions: Iterable[Action]) -> frozenset[Action]:
    return frozenset(a.co() for a in actions)


def restrict_actions(actions: Iterable[Action], names: Iterable[str]) -> frozenset[Action]:
    names = set(names)
    return frozenset(a for a in actions if a.name in names)


# --- systems ----------------------------------------------------------------

@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Protein:
    """A protein occurrence; polar inside systems, apolar inside membranes."""

    name: str
    sites: Interface

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))


@dataclass(frozen=True)
class Cell:
    membrane: "MembraneTerm"
    body: "SystemTerm"


@dataclass(frozen=True)
class Par:
    left: "SystemTerm"
    right: "SystemTerm"


@dataclass(frozen=True)
class Nu:
    name: str
    body: "SystemTerm"


@dataclass(frozen=True)
class Pinch:
    name: str
    body: "SystemTerm"


@dataclass(frozen=True)
class Fuse:
    """``f(n): [membrane](body)`` -- the prefix always wraps one compartment."""

    name: str
    membrane: "MembraneTerm"
    body: "SystemTerm"

    @property
    def cell(self) -> Cell:
        return Cell(self.membrane, self.body)


# --- membranes --------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Star:
    left: "MembraneTerm"
    right: "MembraneTerm"


@dataclass(frozen=True)
class CoPinch:
    name: str
    body: "MembraneTerm"


@dataclass(frozen=True)
class CoFuse:
    name: str


SystemTerm = Union[Empty, Protein, Cell, Par, Nu, Pinch, Fuse]
MembraneTerm = Union[Zero, Protein, Star, CoPinch, CoFuse]
Term = Union[SystemTerm, MembraneTerm]


def par(*terms: SystemTerm) -> SystemTerm:
    """Left-nested composition; ``par()`` is the empty system."""
    if not terms:
        return Empty()
    out = terms[0]
    for t in terms[1:]:
        out = Par(out, t)
    return out


def star(*terms: MembraneTerm) -> MembraneTerm:
    if not terms:
        return Zero()
    out = terms[0]
    for t in terms[1:]:
        out = Star(out, t)
    return out


def nu(names: Iterable[str], body: SystemTerm) -> SystemTerm:
    for n in reversed(list(names)):
        body = Nu(n, body)
    return body


def children(term: Term) -> tuple[Term, ...]:
    if isinstance(term, (Par, Star)):
        return (term.left, term.right)
    if isinstance(term, Cell):
        return (term.membrane, term.body)
    if isinstance(term, Fuse):
        return (term.membrane, term.body)
    if isinstance(term, (Nu, Pinch, CoPinch)):
        return (term.body,)
    return ()


def proteins(term: Term) -> Iterator[Protein]:
    if isinstance(term, Protein):
        yield term
    for c in children(term):
        yield from proteins(c)


def occurring_actions(term: Term, signature: Signature | None = None) -> frozenset[Action]:
    """``act(term)``: every action or co-action occurring in the term.

    Restriction does not hide actions.
    """
    if signature is not None:
        check_signature(term, signature)
    return _act(term)


def _act(term: Term) -> frozenset[Action]:
    if isinstance(term, Pinch):
        return frozenset({Action("pinch", term.name)}) | _act(term.body)
    if isinstance(term, Fuse):
        return frozenset({Action("fuse", term.name)}) | _act(term.membrane) | _act(term.body)
    if isinstance(term, CoPinch):
        return frozenset({Action("copinch", term.name)}) | _act(term.body)
    if isinstance(term, CoFuse):
        return frozenset({Action("cofuse", term.name)})
    out: frozenset[Action] = frozenset()
    for c in children(term):
        out |= _act(c)
    return out


def free_names(term: Term) -> frozenset[str]:
    """Free names, counting action subscripts as name occurrences."""
    if isinstance(term, Protein):
        return frozenset(interface_names(term.sites))
    if isinstance(term, Nu):
        return free_names(term.body) - {term.name}
    if isinstance(term, CoFuse):
        return frozenset({term.name})
    out: frozenset[str] = frozenset()
    if isinstance(term, (Pinch, Fuse, CoPinch)):
        out = frozenset({term.name})
    for c in children(term):
        out |= free_names(c)
    return out


def all_names(term: Term) -> set[str]:
    """Every name written anywhere in the term, bound or free."""
    out: set[str] = set()
    if isinstance(term, Protein):
        out |= interface_names(term.sites)
    if isinstance(term, (Nu, Pinch, Fuse, CoPinch, CoFuse)):
        out.add(term.name)
    for c in children(term):
        out |= all_names(c)
    return out


def check_signature(term: Term, signature: Signature, *, membrane: bool | None = None) -> None:
    """Raise SignatureError for unknown proteins, wrong arity or misplaced polarity.

    ``membrane`` says which side of the grammar ``term`` sits on; it is
    inferred from the constructor when omitted.
    """
    if membrane is None:
        membrane = isinstance(term, (Zero, Star, CoPinch, CoFuse))
    if isinstance(term, Protein):
        polarity, arity = signature.lookup(term.name)
        want = APOLAR if membrane else POLAR
        if polarity != want:
            where = "membrane" if membrane else "system"
            raise SignatureError(f"{polarity} protein {term.name!r} cannot occur in a {where}")
        if len(term.sites) != arity:
            raise SignatureError(
                f"protein {term.name!r} has arity {arity} but {len(term.sites)} sites were given")
        return
    if isinstance(term, (Cell, Fuse)):
        check_signature(term.membrane, signature, membrane=True)
        check_signature(term.body, signature, membrane=False)
        return
    for c in children(term):
        check_signature(c, signature, membrane=membrane)


class NamePool:
    """Deterministic supply of names ``n0, n1, ...`` avoiding a used set."""

    def __init__(self, used: Iterable[str] = (), prefix: str = "n"):
        self.used = set(used)
        self.prefix = prefix
        self._next = 0

    def reserve(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def fresh(self) -> str:
        while True:
            name = f"{self.prefix}{self._next}"
            self._next += 1
            if name not in self.used:
                self.used.add(name)
                return name


def fresh_name(pool: NamePool) -> str:
    return pool.fresh()
