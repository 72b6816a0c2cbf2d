"""Well-formedness: a direct checker of the four conditions and the type system.

The two deciders share nothing beyond the term constructors, so agreement
between them is a meaningful test.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .terms import (
    Action, Cell, CoFuse, CoPinch, Empty, Fuse, Nu, Par, Pinch, Protein, Signature,
    SignatureError, Star, Zero, _act, check_signature, children, coactions,
    occurrence_count, restrict_actions,
)

Position = tuple[int, ...]


def show_position(pos: Position) -> str:
    return "root" + "".join(f".{i}" for i in pos)


# --- direct checker ---------------------------------------------------------

CONDITIONS = ("graph-likeness", "impermeability", "action pairing", "action prefix")


@dataclass
class WfReport:
    failures: dict[str, tuple[Position, str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def verdict(self, condition: str) -> bool:
        return condition not in self.failures

    def __str__(self):
        lines = []
        for c in CONDITIONS:
            if c in self.failures:
                pos, msg = self.failures[c]
                lines.append(f"{c}: fail at {show_position(pos)} ({msg})")
            else:
                lines.append(f"{c}: ok")
        return "\n".join(lines)


def _occurrences(term, pos=(), scope=None, binders=None, out=None):
    """Collect name occurrences keyed by their binder.

    Keys are ``("free", name)`` or ``("nu", position)``; each occurrence is
    ``(key, position, what)`` with ``what`` one of ``site``, or an action kind.
    """
    scope = scope or {}
    if out is None:
        out = []
    if binders is None:
        binders = {}

    def key(name):
        return scope.get(name, ("free", name))

    if isinstance(term, Protein):
        for s in term.sites:
            if s.kind == "b":
                out.append((key(s.name), pos, "site"))
    elif isinstance(term, Nu):
        k = ("nu", pos)
        binders[k] = term.name
        _occurrences(term.body, pos + (0,), {**scope, term.name: k}, binders, out)
        return out, binders
    elif isinstance(term, Pinch):
        out.append((key(term.name), pos, "pinch"))
    elif isinstance(term, Fuse):
        out.append((key(term.name), pos, "fuse"))
    elif isinstance(term, CoPinch):
        out.append((key(term.name), pos, "copinch"))
    elif isinstance(term, CoFuse):
        out.append((key(term.name), pos, "cofuse"))
    for i, c in enumerate(children(term)):
        _occurrences(c, pos + (i,), scope, binders, out)
    return out, binders


def _subterms(term, pos=()):
    yield pos, term
    for i, c in enumerate(children(term)):
        yield from _subterms(c, pos + (i,))


_DUAL = {"pinch": "copinch", "copinch": "pinch", "fuse": "cofuse", "cofuse": "fuse"}


def wf_check(term) -> WfReport:
    """Decide the four well-formedness conditions directly on the syntax."""
    report = WfReport()
    occs, binders = _occurrences(term)
    by_key: dict = {}
    for k, pos, what in occs:
        by_key.setdefault(k, []).append((pos, what))

    for k, items in by_key.items():
        if k[0] == "free" and len(items) > 2:
            report.failures.setdefault(
                "graph-likeness", (items[2][0], f"free name {k[1]} occurs {len(items)} times"))
    for k, name in binders.items():
        n = len(by_key.get(k, ()))
        if n not in (0, 2):
            report.failures.setdefault(
                "graph-likeness", (k[1], f"binder of {name} ties {n} occurrences"))

    for k, items in by_key.items():
        kinds = [w for _, w in items]
        for pos, what in items:
            if what == "site":
                continue
            others = list(kinds)
            others.remove(what)
            if any(o != _DUAL[what] for o in others):
                report.failures.setdefault(
                    "action pairing", (pos, f"name of {what} also used elsewhere"))

    def within(p, prefix):
        return p[:len(prefix)] == prefix

    for pos, t in _subterms(term):
        if isinstance(t, (Cell, Fuse)):
            # a name with a single occurrence in the content links it to the
            # outside, and the link must be anchored in the membrane
            inside = Counter(k for k, p, _ in occs if within(p, pos + (1,)))
            anchored = {k for k, p, _ in occs if within(p, pos + (0,))}
            leak = sorted(binders.get(k, k[1]) for k, c in inside.items()
                          if c == 1 and k not in anchored)
            if leak:
                report.failures.setdefault(
                    "impermeability", (pos, f"bond(s) {', '.join(leak)} cross the membrane"))
        if isinstance(t, (Pinch, CoPinch)):
            cont = t.body
        elif isinstance(t, Fuse):
            cont = t.cell
        else:
            continue
        if _act(cont):
            report.failures.setdefault("action prefix", (pos, "continuation contains actions"))
    return report


def is_well_formed(term) -> bool:
    return wf_check(term).ok


# --- type system ------------------------------------------------------------

class TypeCheckError(Exception):
    def __init__(self, rule: str, position: Position, message: str):
        super().__init__(f"({rule}) at {show_position(position)}: {message}")
        self.rule = rule
        self.position = position
        self.message = message


@dataclass(frozen=True)
class Judgement:
    gamma1: frozenset[str]
    gamma2: frozenset[str]
    tau: frozenset[Action]

    def __str__(self):
        g1 = ", ".join(sorted(self.gamma1))
        g2 = ", ".join(sorted(self.gamma2))
        tau = ", ".join(str(a) for a in sorted(self.tau))
        return f"{g1}; {g2} |- tau = {{{tau}}}"


EMPTY_JUDGEMENT = Judgement(frozenset(), frozenset(), frozenset())


def ok_e(g1, g2, d1, d2) -> bool:
    return not ((set(g1) | set(g2)) & (set(d1) | set(d2)))


def ok_t(shared, tau, sigma) -> bool:
    return coactions(restrict_actions(tau, shared)) == restrict_actions(sigma, shared)


def typecheck(term, signature: Signature | None = None) -> Judgement:
    """Derive ``gamma1; gamma2 |- term : tau`` bottom-up or raise TypeCheckError."""
    if signature is not None:
        try:
            check_signature(term, signature)
        except SignatureError as e:
            raise TypeCheckError("prot", (), str(e)) from None
    return _type(term, ())


def _type(t, pos) -> Judgement:
    if isinstance(t, (Empty, Zero)):
        return EMPTY_JUDGEMENT
    if isinstance(t, Protein):
        names = {s.name for s in t.sites if s.kind == "b"}
        counts = {x: occurrence_count(t.sites, x) for x in names}
        over = [x for x, c in counts.items() if c > 2]
        if over:
            raise TypeCheckError("prot", pos, f"name {over[0]} occurs more than twice in {t.name}")
        return Judgement(frozenset(x for x, c in counts.items() if c == 1),
                         frozenset(x for x, c in counts.items() if c == 2), frozenset())
    if isinstance(t, CoFuse):
        return Judgement(frozenset({t.name}), frozenset(), frozenset({Action("cofuse", t.name)}))
    if isinstance(t, (Pinch, CoPinch, Fuse)):
        if isinstance(t, Fuse):
            # the wrapped cell shares the prefix's child positions (membrane, body)
            cont, kind = t.cell, "fuse"
            j = _type(cont, pos)
        else:
            cont, kind = t.body, ("pinch" if isinstance(t, Pinch) else "copinch")
            j = _type(cont, pos + (0,))
        if j.tau or _act(cont):
            raise TypeCheckError("action", pos, "continuation of a prefix must be action-free")
        if t.name in j.gamma1 or t.name in j.gamma2:
            raise TypeCheckError("action", pos, f"action name {t.name} is not fresh")
        return Judgement(j.gamma1 | {t.name}, j.gamma2, frozenset({Action(kind, t.name)}))
    if isinstance(t, Nu):
        j = _type(t.body, pos + (0,))
        x = t.name
        if x in j.gamma1:
            raise TypeCheckError("nu-prot", pos, f"restriction of {x} ties a single occurrence")
        mine = restrict_actions(j.tau, {x})
        if not mine:
            return Judgement(j.gamma1, j.gamma2 - {x}, j.tau)
        for kind in ("pinch", "fuse"):
            pair = {Action(kind, x), Action(kind, x).co()}
            if mine == pair and x in j.gamma2:
                return Judgement(j.gamma1, j.gamma2 - {x}, j.tau - pair)
        raise TypeCheckError("nu-action", pos, f"restriction of {x} does not close an action pair")
    if isinstance(t, (Par, Star)):
        k = _type(t.left, pos + (0,))
        l = _type(t.right, pos + (1,))
        shared = k.gamma1 & l.gamma1
        g1, d1 = k.gamma1 - shared, l.gamma1 - shared
        if not ok_e(g1, k.gamma2, d1, l.gamma2):
            raise TypeCheckError("par", pos, "a name would occur more than twice")
        if not ok_t(shared, k.tau, l.tau):
            raise TypeCheckError("par", pos, "actions do not pair up with their co-actions")
        return Judgement(g1 | d1, k.gamma2 | l.gamma2 | shared, k.tau | l.tau)
    if isinstance(t, Cell):
        s = _type(t.membrane, pos + (0,))
        p = _type(t.body, pos + (1,))
        shared = p.gamma1
        if not shared <= s.gamma1:
            leak = ", ".join(sorted(shared - s.gamma1))
            raise TypeCheckError("cell", pos, f"bond(s) {leak} cross the membrane")
        g1 = s.gamma1 - shared
        if not ok_e(g1, s.gamma2, (), p.gamma2):
            raise TypeCheckError("cell", pos, "a name would occur more than twice")
        if not ok_t(shared, s.tau, p.tau):
            raise TypeCheckError("cell", pos, "actions do not pair up with their co-actions")
        return Judgement(g1, s.gamma2 | p.gamma2 | shared, s.tau | p.tau)
    raise TypeError(f"not a term: {t!r}")


def try_typecheck(term, signature: Signature | None = None) -> Judgement | None:
    try:
        return typecheck(term, signature)
    except TypeCheckError:
        return None


def self_bond_lints(term) -> list[str]:
    """Proteins binding one name on two of their own sites.

    Such terms type here but their compartment-free translation is rejected.
    """
    out = []
    for pos, t in _subterms(term):
        if isinstance(t, Protein):
            counts = Counter(s.name for s in t.sites if s.kind == "b")
            for x, c in counts.items():
                if c == 2:
                    out.append(f"self-bond {x} on {t.name} at {show_position(pos)}")
    return out
