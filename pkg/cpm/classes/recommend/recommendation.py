#!/usr/bin/env python3
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .fusion import fuse_hybrid
from .voting import vote
from ..index.precedent import Neighbor, PrecedentIndex
from ..model.distributions import RoleDistribution
from ..model.retrieval import RetrievalConfig
from ..model.roles import Role, ROLES
from ..model.vocabulary import RoleVocabulary

FLAG_PRIOR_FALLBACK = "no_neighbors_prior_fallback"
FLAG_HEAD_MISSING = "head_missing:{}"


@dataclass(frozen=True)
class Recommendation:
    distributions: Dict[Role, RoleDistribution]
    neighbors: Tuple[Neighbor, ...]
    config: RetrievalConfig
    query: Optional[str] = None
    flags: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def top_precedent(self) -> Optional[Neighbor]:
        return self.neighbors[0] if self.neighbors else None

    def ranked(self, role: Role) -> List[Tuple[int, float]]:
        """(class, probability) by probability descending, ties by ascending class."""
        return self.distributions[role].ranked()

    def top(self, role: Role) -> int:
        return self.distributions[role].top()

    def to_dict(self, vocabs: Dict[Role, RoleVocabulary], top: Optional[int] = None) -> dict:
        def labels_of(neighbor: Neighbor) -> dict:
            return {role.value: vocabs[role].label_for(neighbor.label(role)) for role in ROLES}

        return {
            "query": self.query,
            "config": self.config.to_dict(),
            "flags": list(self.flags),
            "roles": {
                role.value: [{"class": index, "label": vocabs[role].label_for(index), "score": score}
                             for index, score in self.ranked(role)[:top]]
                for role in ROLES},
            "neighbors": [{"id": neighbor.id, "similarity": neighbor.similarity, "labels": labels_of(neighbor)}
                          for neighbor in self.neighbors],
        }

    def to_json(self, vocabs: Dict[Role, RoleVocabulary], top: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(vocabs, top), sort_keys=True)


def recommend(query_key: np.ndarray, index: PrecedentIndex, head_probs: Dict[Role, Optional[np.ndarray]],
              config: RetrievalConfig, prior: Dict[Role, RoleDistribution],
              exclude: Optional[Iterable[int]] = None, query_id: Optional[str] = None) -> Recommendation:
    """Neighbor vote per role, fused with the head distribution when one is available.

    An empty neighbor set substitutes the prior for the vote; a missing head leaves the vote alone.
    Both cases are flagged on the result."""
    neighbors = index.search(query_key, config.k, exclude)
    flags = []
    if not neighbors:
        flags.append(FLAG_PRIOR_FALLBACK)
    distributions = {}
    for role in ROLES:
        p_knn = vote(neighbors, config.temperature, index.vocabs[role]) if neighbors else prior[role]
        head = head_probs.get(role)
        if head is None:
            flags.append(FLAG_HEAD_MISSING.format(role.value))
            distributions[role] = p_knn
        else:
            distributions[role] = fuse_hybrid(RoleDistribution(role, head), p_knn, config.alpha)
    return Recommendation(distributions, tuple(neighbors), config, query_id, tuple(flags))
