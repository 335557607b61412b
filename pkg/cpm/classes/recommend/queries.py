#!/usr/bin/env python3
"""Query resolution shared by the command line and the HTTP service.

A query names an indexed or banked reaction by id, carries a raw key vector,
or carries reactant and product SMILES.  SMILES queries need a fingerprint
index.  Queries by an indexed id never retrieve their own row."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .recommendation import Recommendation, recommend
from ..index.precedent import PrecedentIndex
from ..ingest.bank import EmbeddingBank
from ..ingest.heads import HeadProbabilities
from ..model.distributions import RoleDistribution
from ..model.records import ReactionRecord
from ..model.retrieval import RetrievalConfig
from ..model.roles import Role, ROLES
from ..util.errors import UnknownReactionError, UsageError


@dataclass(frozen=True)
class Query:
    reaction_id: Optional[str] = None
    vector: Optional[Sequence[float]] = None
    reactants: Optional[Sequence[str]] = None
    products: Optional[Sequence[str]] = None

    def __post_init__(self):
        forms = sum([self.reaction_id is not None, self.vector is not None,
                     self.reactants is not None or self.products is not None])
        if forms != 1:
            raise UsageError("A query needs exactly one of: reaction id, key vector, reactant/product SMILES.")
        if (self.reactants is None) != (self.products is None):
            raise UsageError("SMILES queries need both reactants and products.")

    @property
    def is_smiles(self) -> bool:
        return self.reactants is not None


class RecommendationEngine:
    """Read-only state behind every recommendation: index, optional bank, heads, records and priors."""

    def __init__(self, index: PrecedentIndex, prior: Dict[Role, RoleDistribution],
                 config: RetrievalConfig, bank: Optional[EmbeddingBank] = None,
                 heads: Optional[HeadProbabilities] = None, records: Optional[Dict[str, ReactionRecord]] = None):
        if config.key_kind != index.key_kind:
            logging.warning("Retrieval key '{}' differs from the loaded index '{}'; using the index.".format(
                config.key_kind.value, index.key_kind.value))
            config = RetrievalConfig(index.key_kind, config.k, config.temperature, config.alpha)
        self.index = index
        self.prior = prior
        self.config = config
        self.bank = bank
        self.heads = heads
        self.records = records or {}

    @property
    def vocabs(self):
        return self.index.vocabs

    def _key_for_id(self, reaction_id: str) -> np.ndarray:
        if self.index.is_fingerprint:
            if reaction_id not in self.records:
                raise UnknownReactionError(reaction_id)
            return self.index.query_key(self.records[reaction_id])
        if self.bank is None or reaction_id not in self.bank:
            raise UnknownReactionError(reaction_id)
        return self.index.query_key(reaction_id, self.bank)

    def resolve(self, query: Query):
        """Returns (key, excluded rows, head distributions per role)."""
        heads = {role: None for role in ROLES}
        if query.reaction_id is not None:
            key = self._key_for_id(query.reaction_id)
            row = self.index.row_of(query.reaction_id)
            if self.heads is not None:
                heads = {role: self.heads.get(role, query.reaction_id) for role in ROLES}
            return key, ([] if row is None else [row]), heads
        if query.vector is not None:
            try:
                vector = np.asarray(query.vector, dtype=np.float64)
            except (TypeError, ValueError):
                raise UsageError("Query vector must be a flat list of numbers.")
            return vector, [], heads
        if not self.index.is_fingerprint:
            raise UsageError("SMILES queries need a fingerprint-keyed index; this index is keyed by '{}'.".format(
                self.index.key_kind.value))
        record = ReactionRecord("<query>", tuple(query.reactants), tuple(query.products))
        return self.index.fingerprint.fingerprint(record).bits.astype(np.uint8), [], heads

    def recommend(self, query: Query, config: Optional[RetrievalConfig] = None) -> Recommendation:
        config = config or self.config
        key, exclude, heads = self.resolve(query)
        return recommend(key, self.index, heads, config, self.prior, exclude, query.reaction_id)

    def recommend_many(self, queries: Sequence[Query], config: Optional[RetrievalConfig] = None,
                       threads: int = 1) -> List[Recommendation]:
        """Output order follows query order whatever the thread count."""
        if threads > 1 and len(queries) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(lambda query: self.recommend(query, config), queries))
        return [self.recommend(query, config) for query in queries]

    def recommend_ids(self, reaction_ids: Sequence[str], config: Optional[RetrievalConfig] = None,
                      threads: int = 1) -> List[Recommendation]:
        return self.recommend_many([Query(reaction_id=reaction_id) for reaction_id in reaction_ids], config, threads)
