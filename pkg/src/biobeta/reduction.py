"""The reaction relation of a specification: enabled redexes, stepping, runs, reachability."""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable

from .canonical import CanonicalState, iter_labels, render
from .membranes import (
    INTRO_KINDS, MobilityRedex, apply_mobility, find_commit_redexes, find_intro_redexes,
)
from .model import Specification
from .proteins import CompiledRule, Match, apply_protein_redex, find_protein_redexes, validate_rule
from .terms import Action, NamePool, occurring_actions
from .wellformed import Judgement, typecheck

DEFAULT_STATE_CAP = 10_000
DEFAULT_DEPTH = 32


class StepError(RuntimeError):
    pass


class AuditError(StepError):
    """A step broke subject reduction; always an implementation bug."""


class StateCapExceeded(RuntimeError):
    def __init__(self, partial: "Reachability"):
        super().__init__(f"state cap of {partial.cap} exceeded")
        self.partial = partial


@dataclass(frozen=True)
class Redex:
    ordinal: int
    item: Match | MobilityRedex

    @property
    def is_protein(self) -> bool:
        return isinstance(self.item, Match)

    def describe(self) -> str:
        return self.item.describe()


def _order_key(item):
    if isinstance(item, Match):
        return (0, item.rule_id, tuple((ref, idxs) for _, _, ref, idxs in item.placements))
    if item.kind in INTRO_KINDS:
        return (1, item.config_id, item.kind, item.path, item.cells,
                tuple((ref, idxs) for _, ref, idxs in item.placements))
    return (2, item.kind, item.path, item.cells)


@dataclass(frozen=True)
class Delta:
    """Judgement change across one step."""

    before: Judgement
    after: Judgement
    shape: str  # "unchanged" or "pair"
    open_before: Judgement | None = None
    open_after: Judgement | None = None

    def __str__(self):
        s = f"{self.before}  ==>  {self.after}  [{self.shape}]"
        if self.open_before is not None:
            s += f"; open: {self.open_before}  ==>  {self.open_after}"
        return s


def _pair_shape(big: Judgement, small: Judgement, name: str) -> bool:
    pair = {Action("pinch", name), Action("copinch", name)}, {Action("fuse", name), Action("cofuse", name)}
    return (big.gamma1 == small.gamma1 and big.gamma2 == small.gamma2 | {name}
            and name not in small.gamma2
            and any(big.tau == small.tau | p and not (small.tau & p) for p in pair))


def sr_shape(before: Judgement, after: Judgement) -> str | None:
    """Which admissible subject-reduction shape relates two judgements, if any."""
    if before == after:
        return "unchanged"
    for n in before.gamma2 - after.gamma2:
        if _pair_shape(before, after, n):
            return "pair"
    return None


def _open_name(loc, bond_id) -> tuple[dict, str]:
    free = {l[1] for l in iter_labels(loc) if l[0] == "f"}
    name = NamePool(free, prefix="n").fresh()
    return {bond_id: name}, name


def judge(state) -> Judgement:
    return typecheck(render(state)[0])


class ReactiveSystem:
    """A validated specification together with its reaction relation."""

    def __init__(self, spec: Specification, *, strict_fuse=False, audit=True):
        self.spec = spec
        self.strict_fuse = strict_fuse
        self.audit = audit
        self.rules: list[CompiledRule] = sorted(
            (validate_rule(r) for r in spec.protein_rules), key=lambda c: c.id)
        self._by_id = {c.id: c for c in self.rules}
        self.configs = sorted(list(spec.pinch_configs) + list(spec.fuse_configs), key=lambda c: c.id)

    def initial(self, name: str) -> CanonicalState:
        from .canonical import canonicalize

        return canonicalize(self.spec.systems[name])

    # -- enabling --

    def enabled(self, state: CanonicalState) -> list[Redex]:
        items: list = []
        for c in self.rules:
            items += find_protein_redexes(state, c)
        for cfg in self.configs:
            items += find_intro_redexes(state, cfg, strict_fuse=self.strict_fuse)
        items += find_commit_redexes(state)
        items.sort(key=_order_key)
        return [Redex(i, it) for i, it in enumerate(items)]

    def apply(self, state: CanonicalState, redex: Redex) -> CanonicalState:
        item = redex.item
        if isinstance(item, Match):
            return apply_protein_redex(state, item, self._by_id[item.rule_id])
        return apply_mobility(state, item)

    # -- auditing --

    def audit_step(self, state, redex: Redex, new) -> Delta:
        before, after = judge(state), judge(new)
        shape = sr_shape(before, after)
        if shape is None:
            raise AuditError(f"{redex.describe()}: {before} ==> {after}")
        item = redex.item
        if isinstance(item, MobilityRedex):
            if item.kind in INTRO_KINDS:
                ob, name = _open_name(item.result, item.fresh[1])
                opened = typecheck(render(item.result, open_bonds=ob)[0])
                if not _pair_shape(opened, before, name):
                    raise AuditError(f"{redex.describe()}: open result {opened} vs {before}")
                return Delta(before, after, shape, before, opened)
            if item.label[0] == "b":
                ob, name = _open_name(state.root, item.label[1])
                opened = typecheck(render(state, open_bonds=ob)[0])
            else:
                name, opened = item.label[1], before
            if not _pair_shape(opened, after, name):
                raise AuditError(f"{redex.describe()}: open source {opened} vs {after}")
            kinds = Counter(a.kind for a in occurring_actions(render(state)[0]))
            kinds.subtract(a.kind for a in occurring_actions(render(new)[0]))
            consumed = {k: v for k, v in kinds.items() if v}
            if consumed not in ({"pinch": 1, "copinch": 1}, {"fuse": 1, "cofuse": 1}):
                raise AuditError(f"{redex.describe()}: commitment did not consume one action pair")
            return Delta(before, after, shape, opened, after)
        return Delta(before, after, shape)

    def step(self, state: CanonicalState, ordinal: int, redexes=None):
        redexes = self.enabled(state) if redexes is None else redexes
        if not 0 <= ordinal < len(redexes):
            raise StepError(f"ordinal {ordinal} out of range (0..{len(redexes) - 1})")
        r = redexes[ordinal]
        new = self.apply(state, r)
        delta = self.audit_step(state, r, new) if self.audit else None
        return new, delta

    # -- runs --

    def run(self, state: CanonicalState, strategy="first", max_steps=64, seed=None,
            chooser: Callable | None = None) -> "Trace":
        rng = random.Random(seed)
        trace = Trace(state)
        for _ in range(max_steps):
            redexes = self.enabled(state)
            if not redexes:
                break
            if strategy == "first":
                k = 0
            elif strategy == "random":
                k = rng.randrange(len(redexes))
            elif strategy == "interactive":
                if chooser is None:
                    raise ValueError("interactive strategy needs a chooser")
                k = chooser(state, redexes)
                if k is None:
                    break
            else:
                raise ValueError(f"unknown strategy {strategy!r}")
            r = redexes[k] if 0 <= k < len(redexes) else None
            if r is None:
                raise StepError(f"ordinal {k} out of range (0..{len(redexes) - 1})")
            state, delta = self.step(state, k, redexes)
            trace.steps.append((r.describe(), state))
            if delta is not None:
                trace.audit.append(str(delta))
        return trace

    # -- reachability --

    def reachable(self, state: CanonicalState, depth=DEFAULT_DEPTH, state_cap=DEFAULT_STATE_CAP,
                  on_edge: Callable | None = None, goal: Callable | None = None) -> "Reachability":
        """Breadth-first exploration; ``on_edge(src, redex, dst, delta)`` sees every edge.

        With ``goal``, stops at the first (hence shallowest) state satisfying it
        and records it as ``found``.
        """
        res = Reachability(state, state_cap)
        res.parent[state] = None
        res.depth[state] = 0
        if goal is not None and goal(state):
            res.found = state
            return res
        queue = deque([state])
        while queue:
            s = queue.popleft()
            d = res.depth[s]
            if d >= depth:
                continue
            redexes = self.enabled(s)
            for r in redexes:
                t = self.apply(s, r)
                delta = self.audit_step(s, r, t) if self.audit else None
                res.edges += 1
                if on_edge is not None:
                    on_edge(s, r, t, delta)
                if t not in res.parent:
                    if len(res.parent) >= state_cap:
                        raise StateCapExceeded(res)
                    res.parent[t] = (s, r.describe())
                    res.depth[t] = d + 1
                    if goal is not None and goal(t):
                        res.found = t
                        return res
                    queue.append(t)
        return res


@dataclass
class Trace:
    initial: CanonicalState
    steps: list = field(default_factory=list)
    audit: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def final(self) -> CanonicalState:
        return self.steps[-1][1] if self.steps else self.initial

    def serialize(self) -> str:
        lines = ["#0 init", self.initial.text()]
        for k, (desc, s) in enumerate(self.steps, 1):
            lines += [f"#{k} {desc}", s.text()]
        return "\n".join(lines) + "\n"


@dataclass
class Reachability:
    root: CanonicalState
    cap: int
    parent: dict = field(default_factory=dict)
    depth: dict = field(default_factory=dict)
    edges: int = 0
    found: CanonicalState | None = None

    @property
    def states(self):
        return list(self.parent)

    def __len__(self):
        return len(self.parent)

    def witness(self, state: CanonicalState) -> Trace:
        chain = []
        while self.parent[state] is not None:
            prev, desc = self.parent[state]
            chain.append((desc, state))
            state = prev
        return Trace(state, list(reversed(chain)))
