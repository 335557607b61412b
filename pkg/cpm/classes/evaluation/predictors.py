#!/usr/bin/env python3
"""Batch predictors producing per-role probability matrices [rows x classes]."""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..index.precedent import Neighbor, PrecedentIndex
from ..ingest.bank import EmbeddingBank
from ..ingest.heads import HeadProbabilities
from ..model.distributions import RoleDistribution
from ..model.records import ReactionRecord
from ..model.retrieval import RetrievalConfig
from ..model.roles import Role, ROLES
from ..recommend.baselines import TemplateMajority
from ..recommend.voting import vote_probabilities

PRIOR = "prior"
TEMPLATE_MAJORITY = "template_majority"
DRFP_KNN = "drfp_knn"
KNN = "knn"
HEAD = "head"
HYBRID = "hybrid"
PREDICTOR_ORDER = (PRIOR, TEMPLATE_MAJORITY, DRFP_KNN, KNN, HEAD, HYBRID)


@dataclass(frozen=True)
class Predictions:
    name: str
    probs: Dict[Role, np.ndarray]

    @property
    def roles(self) -> List[Role]:
        return [role for role in ROLES if role in self.probs]


def query_keys(index: PrecedentIndex, records: Sequence[ReactionRecord],
               bank: Optional[EmbeddingBank] = None) -> List[np.ndarray]:
    return [index.query_key(record, bank) for record in records]


def knn_predictions(index: PrecedentIndex, neighbors: Sequence[Sequence[Neighbor]], config: RetrievalConfig,
                    prior: Dict[Role, RoleDistribution], name: str = KNN):
    """Votes over the first config.k neighbors of each row; rows without neighbors take the prior.

    Returns (Predictions, number of prior fallbacks)."""
    probs = {role: np.zeros((len(neighbors), index.vocabs[role].size_with_absent)) for role in ROLES}
    fallbacks = 0
    for i, row in enumerate(neighbors):
        row = row[:config.k]
        if not row:
            fallbacks += 1
            for role in ROLES:
                probs[role][i] = prior[role].probs
            continue
        similarities = np.array([neighbor.similarity for neighbor in row])
        for role in ROLES:
            labels = np.array([neighbor.label(role) for neighbor in row], dtype=np.int64)
            probs[role][i] = vote_probabilities(labels, similarities, index.vocabs[role].size_with_absent,
                                                config.temperature)
    return Predictions(name, probs), fallbacks


def head_predictions(heads: HeadProbabilities, ids: Sequence[str]) -> Predictions:
    return Predictions(HEAD, {role: np.array(heads.matrix(role, ids)) for role in heads.roles})


def hybrid_predictions(head: Predictions, knn: Predictions, alpha: float) -> Predictions:
    return Predictions(HYBRID, {role: alpha * head.probs[role] + (1.0 - alpha) * knn.probs[role]
                                for role in head.roles})


def prior_predictions(prior: Dict[Role, RoleDistribution], rows: int) -> Predictions:
    return Predictions(PRIOR, {role: np.tile(prior[role].probs, (rows, 1)) for role in ROLES})


def template_predictions(model: TemplateMajority, records: Sequence[ReactionRecord]) -> Predictions:
    return Predictions(TEMPLATE_MAJORITY, {
        role: np.array([model.predict(record, role).probs for record in records]).reshape(
            len(records), model.vocabs[role].size_with_absent)
        for role in ROLES})
