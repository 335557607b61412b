#!/usr/bin/env python3
"""Overlap (leakage) audit of retrieved precedents.

Each rung removes every neighbor matched by its own criterion or by any
earlier rung's criterion before the top-k cut:

    none                            nothing removed
    same_canonical_reaction         identical canonical reaction string
    same_reactant_product_pair      same product list and at least one shared reactant
    same_product_string             same canonical product list
    same_product_and_publication    ... or the same publication proxy

P@k is the mean, over queries with at least one surviving neighbor, of the
fraction of surviving top-k neighbors the relevance predicate accepts."""
import logging
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum, unique
from typing import Callable, Dict, List, Optional, Sequence, Set

import numpy as np

from ..index.precedent import Neighbor, PrecedentIndex
from ..model.records import MultiHotTarget, ReactionRecord
from ..model.roles import Role
from ..util.decorators import log_progress
from ..util.errors import UnknownReactionError, UsageError


@unique
class ExclusionRung(str, Enum):
    none = "none"
    same_canonical_reaction = "same_canonical_reaction"
    same_reactant_product_pair = "same_reactant_product_pair"
    same_product_string = "same_product_string"
    same_product_and_publication = "same_product_and_publication"

    @property
    def level(self) -> int:
        return list(ExclusionRung).index(self)

    @staticmethod
    def parse(s: str) -> List["ExclusionRung"]:
        """A rung name, or 'all' for the whole ladder."""
        s = s.strip().lower()
        if s == "all":
            return list(ExclusionRung)
        try:
            return [ExclusionRung(s)]
        except ValueError:
            raise UsageError("Unknown exclusion rung '{}'; expected 'all' or one of {}.".format(
                s, ", ".join(rung.value for rung in ExclusionRung)))


Relevance = Callable[[ReactionRecord, MultiHotTarget, Neighbor], bool]


def label_relevance(role: Role) -> Relevance:
    """A neighbor is relevant when its label for the role is one of the query's valid labels."""
    def relevant(query: ReactionRecord, target: MultiHotTarget, neighbor: Neighbor) -> bool:
        return neighbor.label(role) in target.valid_labels
    return relevant


class OverlapKeys:
    """Lookup tables from reaction identities to index rows."""

    def __init__(self, index: PrecedentIndex, records: Dict[str, ReactionRecord]):
        self.by_canonical = defaultdict(set)
        self.by_products = defaultdict(set)
        self.by_proxy = defaultdict(set)
        self.reactants = {}
        for row, reaction_id in enumerate(index.ids):
            if reaction_id not in records:
                raise UnknownReactionError(reaction_id)
            record = records[reaction_id]
            self.by_canonical[record.canonical].add(row)
            self.by_products[record.canonical_products].add(row)
            if record.publication_proxy:
                self.by_proxy[record.publication_proxy].add(row)
            self.reactants[row] = record.canonical_reactant_set

    def excluded(self, query: ReactionRecord, rung: ExclusionRung) -> Set[int]:
        rows = set()
        if rung.level >= ExclusionRung.same_canonical_reaction.level:
            rows |= self.by_canonical.get(query.canonical, set())
        if rung.level >= ExclusionRung.same_reactant_product_pair.level:
            shared = query.canonical_reactant_set
            rows |= {row for row in self.by_products.get(query.canonical_products, ())
                     if self.reactants[row] & shared}
        if rung.level >= ExclusionRung.same_product_string.level:
            rows |= self.by_products.get(query.canonical_products, set())
        if rung.level >= ExclusionRung.same_product_and_publication.level and query.publication_proxy:
            rows |= self.by_proxy.get(query.publication_proxy, set())
        return rows


@dataclass(frozen=True)
class OverlapAuditRow:
    rung: ExclusionRung
    precision: Optional[float]
    queries: int
    skipped: int
    k: int

    def to_dict(self) -> dict:
        return {"rung": self.rung.value, "precision@k": self.precision, "queries": self.queries,
                "skipped": self.skipped, "k": self.k}


def overlap_audit(index: PrecedentIndex, queries: Sequence[ReactionRecord], query_keys: Sequence[np.ndarray],
                  targets: Sequence[MultiHotTarget], records: Dict[str, ReactionRecord],
                  rungs: Sequence[ExclusionRung] = tuple(ExclusionRung), k: int = 5,
                  relevance: Optional[Relevance] = None, role: Role = Role.reagent) -> List[OverlapAuditRow]:
    """records must cover every indexed id; query_keys and targets align with queries."""
    if not len(queries) == len(query_keys) == len(targets):
        raise UsageError("Audit queries, keys and targets must align ({}, {}, {}).".format(
            len(queries), len(query_keys), len(targets)))
    relevance = relevance or label_relevance(role)
    keys = OverlapKeys(index, records)
    results = []
    for rung in rungs:
        precisions = []
        for i, (query, key, target) in enumerate(zip(queries, query_keys, targets)):
            neighbors = index.search(key, k, keys.excluded(query, rung))
            if neighbors:
                precisions.append(sum(1 for n in neighbors if relevance(query, target, n)) / len(neighbors))
            log_progress("overlap audit", i + 1, len(queries))
        row = OverlapAuditRow(rung, float(np.mean(precisions)) if precisions else None,
                              len(precisions), len(queries) - len(precisions), k)
        logging.info("Overlap audit rung {}: P@{} = {} over {} queries ({} without survivors).".format(
            rung.value, k, row.precision, row.queries, row.skipped))
        results.append(row)
    return results
