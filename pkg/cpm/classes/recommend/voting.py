#!/usr/bin/env python3
"""Neighbor votes.  Absent-labelled neighbors vote for class 0."""
from typing import Optional, Sequence

import numpy as np

from ..index.precedent import Neighbor
from ..model.distributions import RoleDistribution
from ..model.vocabulary import RoleVocabulary
from ..util.errors import DimensionError, NoNeighborsError, UsageError


def _labels(neighbors: Sequence[Neighbor], vocab: RoleVocabulary) -> np.ndarray:
    if not neighbors:
        raise NoNeighborsError("Cannot vote over an empty {} neighbor set.".format(vocab.role.value))
    labels = np.array([neighbor.label(vocab.role) for neighbor in neighbors], dtype=np.int64)
    if labels.min() < 0 or labels.max() >= vocab.size_with_absent:
        raise DimensionError("Neighbor {} label outside [0, {}).".format(vocab.role.value, vocab.size_with_absent))
    return labels


def softmax_weights(similarities: np.ndarray, temperature: float) -> np.ndarray:
    """exp((s - max s) / t), normalized."""
    if not temperature > 0:
        raise UsageError("Temperature must be positive, got {}.".format(temperature))
    similarities = np.asarray(similarities, dtype=np.float64)
    exp_s = np.exp((similarities - similarities.max()) / temperature)
    return exp_s / exp_s.sum()


def vote_probabilities(labels: np.ndarray, similarities: np.ndarray, size: int,
                       temperature: Optional[float] = None) -> np.ndarray:
    """Array form of both votes.  temperature None is the uniform vote."""
    if temperature is None:
        return np.bincount(labels, minlength=size).astype(np.float64) / len(labels)
    return np.bincount(labels, weights=softmax_weights(similarities, temperature), minlength=size)


def vote_uniform(neighbors: Sequence[Neighbor], vocab: RoleVocabulary) -> RoleDistribution:
    labels = _labels(neighbors, vocab)
    return RoleDistribution(vocab.role, vote_probabilities(labels, None, vocab.size_with_absent))


def vote_softmax(neighbors: Sequence[Neighbor], temperature: float, vocab: RoleVocabulary) -> RoleDistribution:
    labels = _labels(neighbors, vocab)
    similarities = [neighbor.similarity for neighbor in neighbors]
    return RoleDistribution(vocab.role, vote_probabilities(labels, similarities, vocab.size_with_absent, temperature))


def vote(neighbors: Sequence[Neighbor], temperature: Optional[float], vocab: RoleVocabulary) -> RoleDistribution:
    if temperature is None:
        return vote_uniform(neighbors, vocab)
    return vote_softmax(neighbors, temperature, vocab)
