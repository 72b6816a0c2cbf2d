"""Specification-level data: wide protein solutions, rules, configurations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    Empty, Par, Protein, Signature, Star, SystemTerm, MembraneTerm, Zero, interface_names,
)

MONOTONE = "monotone"
ANTIMONOTONE = "antimonotone"

Group = tuple[Protein, ...]


@dataclass(frozen=True)
class WideSolution:
    """``new xs. < P1, .., Pk | S1, .., Sh >`` -- groups are protein lists."""

    system_groups: tuple[Group, ...] = ()
    membrane_groups: tuple[Group, ...] = ()
    restricted: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "system_groups", tuple(tuple(g) for g in self.system_groups))
        object.__setattr__(self, "membrane_groups", tuple(tuple(g) for g in self.membrane_groups))
        object.__setattr__(self, "restricted", tuple(self.restricted))

    def groups(self):
        """Yield ``(zone, index, group)`` with zone ``"sys"`` or ``"mem"``."""
        for i, g in enumerate(self.system_groups):
            yield "sys", i, g
        for i, g in enumerate(self.membrane_groups):
            yield "mem", i, g

    def all_proteins(self) -> list[Protein]:
        return [p for _, _, g in self.groups() for p in g]

    def names(self) -> set[str]:
        out: set[str] = set()
        for p in self.all_proteins():
            out |= interface_names(p.sites)
        return out

    def free_names(self) -> set[str]:
        return self.names() - set(self.restricted)

    def unrestricted(self) -> "WideSolution":
        return WideSolution(self.system_groups, self.membrane_groups)


@dataclass(frozen=True)
class ProteinRule:
    """A monotone pair (small, new xs. big) or its anti-monotone reversal.

    ``small`` never carries a restriction; ``big.restricted`` holds the
    names created by the monotone direction.
    """

    id: str
    direction: str
    small: WideSolution
    big: WideSolution

    @property
    def created(self) -> tuple[str, ...]:
        return self.big.restricted

    @property
    def lhs(self) -> WideSolution:
        return self.small if self.direction == MONOTONE else self.big

    @property
    def rhs(self) -> WideSolution:
        return self.big if self.direction == MONOTONE else self.small


def group_of(term) -> Group:
    """Flatten an action-free protein composition (system or membrane)."""
    if isinstance(term, (Empty, Zero)):
        return ()
    if isinstance(term, Protein):
        return (term,)
    if isinstance(term, (Par, Star)):
        return group_of(term.left) + group_of(term.right)
    raise ValueError(f"not a protein composition: {term!r}")


@dataclass(frozen=True)
class PinchConfig:
    id: str
    P: SystemTerm
    Pp: SystemTerm
    S: MembraneTerm
    Sp: MembraneTerm
    Q: SystemTerm


@dataclass(frozen=True)
class FuseConfig:
    id: str
    P: SystemTerm
    S: MembraneTerm
    R: SystemTerm
    T: MembraneTerm
    Q: SystemTerm


@dataclass
class Specification:
    signature: Signature
    protein_rules: list[ProteinRule] = field(default_factory=list)
    pinch_configs: list[PinchConfig] = field(default_factory=list)
    fuse_configs: list[FuseConfig] = field(default_factory=list)
    systems: dict[str, SystemTerm] = field(default_factory=dict)

    def rule(self, rule_id: str) -> ProteinRule:
        for r in self.protein_rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)
