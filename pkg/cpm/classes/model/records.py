#!/usr/bin/env python3
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .roles import Role, ROLES, Split
from .vocabulary import RoleVocabulary, remap_absent
from ..smiles.reaction import canonical_reaction_string, canonical_side
from ..util.errors import DataError


@dataclass(frozen=True)
class ReactionRecord:
    id: str
    reactants: Tuple[str, ...]
    products: Tuple[str, ...]
    catalyst: Optional[str] = None
    solvent: Optional[str] = None
    reagent: Optional[str] = None
    split: Split = Split.train
    publication_proxy: Optional[str] = None

    def __post_init__(self):
        if not self.reactants:
            raise DataError("Reaction '{}' has no reactants.".format(self.id))
        if not self.products:
            raise DataError("Reaction '{}' has no products.".format(self.id))
        object.__setattr__(self, "reactants", tuple(self.reactants))
        object.__setattr__(self, "products", tuple(self.products))

    def label(self, role: Role) -> Optional[str]:
        return getattr(self, role.value) or None

    @property
    def conditions(self) -> Dict[Role, Optional[str]]:
        return {role: self.label(role) for role in ROLES}

    @cached_property
    def canonical(self) -> str:
        return canonical_reaction_string(self.reactants, self.products)

    @cached_property
    def canonical_products(self) -> str:
        return canonical_side(self.products)

    @cached_property
    def canonical_reactant_set(self) -> FrozenSet[str]:
        return frozenset(canonical_side(self.reactants).split("."))


def validate_labels(record: ReactionRecord, vocabs: Dict[Role, RoleVocabulary]):
    """Every present label must belong to its role vocabulary."""
    for role in ROLES:
        remap_absent(record.label(role), vocabs[role])


def remapped_labels(record: ReactionRecord, vocabs: Dict[Role, RoleVocabulary]) -> Dict[Role, int]:
    return {role: remap_absent(record.label(role), vocabs[role]) for role in ROLES}


@dataclass(frozen=True)
class MultiHotTarget:
    role: Role
    valid_labels: FrozenSet[int]
    size_with_absent: int

    def __post_init__(self):
        if not self.valid_labels:
            raise DataError("Multi-hot target for {} is empty.".format(self.role.value))
        if any(not 0 <= i < self.size_with_absent for i in self.valid_labels):
            raise DataError("Multi-hot target {} has a class outside [0, {}).".format(
                sorted(self.valid_labels), self.size_with_absent))
        object.__setattr__(self, "valid_labels", frozenset(self.valid_labels))


def build_multihot(group: Iterable[ReactionRecord], vocabs: Dict[Role, RoleVocabulary]) -> Dict[Role, MultiHotTarget]:
    """Union of remapped labels over records sharing a canonical reaction string."""
    group = list(group)
    if not group:
        raise DataError("Cannot build a multi-hot target from an empty group.")
    valid = {role: set() for role in ROLES}
    for record in group:
        for role, index in remapped_labels(record, vocabs).items():
            valid[role].add(index)
    return {role: MultiHotTarget(role, frozenset(valid[role]), vocabs[role].size_with_absent) for role in ROLES}


def group_by_canonical(records: Iterable[ReactionRecord]) -> "OrderedDict[str, List[ReactionRecord]]":
    groups = OrderedDict()
    for record in records:
        groups.setdefault(record.canonical, []).append(record)
    return groups


def row_targets(records: List[ReactionRecord], vocabs: Dict[Role, RoleVocabulary]) -> List[Dict[Role, MultiHotTarget]]:
    """Per-row targets where duplicates within the list share the union of their labels."""
    groups = group_by_canonical(records)
    by_canonical = {canonical: build_multihot(group, vocabs) for canonical, group in groups.items()}
    return [by_canonical[record.canonical] for record in records]


def duplicate_group_count(records: Iterable[ReactionRecord]) -> int:
    return sum(1 for group in group_by_canonical(records).values() if len(group) > 1)
