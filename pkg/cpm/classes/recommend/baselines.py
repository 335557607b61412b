#!/usr/bin/env python3
"""Matched baselines: the condition prior and the template-majority vote.

The third matched baseline, fingerprint k-NN, is an ordinary recommendation
over a drfp-keyed precedent index with alpha = 0."""
import logging
from collections import defaultdict
from typing import Dict, Optional, Sequence

import numpy as np

from ..fingerprint.drfp import FingerprintParams, template_key
from ..model.distributions import RoleDistribution
from ..model.records import ReactionRecord
from ..model.roles import Role, ROLES
from ..model.vocabulary import RoleVocabulary, remap_absent
from ..util.errors import DataError


def baseline_prior(train: Sequence[ReactionRecord], vocab: RoleVocabulary) -> RoleDistribution:
    """Empirical frequencies of remapped classes over the training records."""
    if not train:
        raise DataError("The condition prior needs at least one training record.")
    labels = np.array([remap_absent(record.label(vocab.role), vocab) for record in train], dtype=np.int64)
    return RoleDistribution(vocab.role, np.bincount(labels, minlength=vocab.size_with_absent) / len(labels))


def priors(train: Sequence[ReactionRecord], vocabs: Dict[Role, RoleVocabulary]) -> Dict[Role, RoleDistribution]:
    return {role: baseline_prior(train, vocabs[role]) for role in ROLES}


class TemplateMajority:
    """Label counts per template key over the training records, for the roles in vocabs."""

    def __init__(self, train: Sequence[ReactionRecord], vocabs: Dict[Role, RoleVocabulary],
                 fingerprint: Optional[FingerprintParams] = None):
        self.vocabs = vocabs
        self.fingerprint = fingerprint or FingerprintParams()
        self.prior = {role: baseline_prior(train, vocab) for role, vocab in vocabs.items()}
        self.counts = defaultdict(lambda: {role: np.zeros(vocab.size_with_absent) for role, vocab in vocabs.items()})
        for record in train:
            counts = self.counts[self.key(record)]
            for role, vocab in vocabs.items():
                counts[role][remap_absent(record.label(role), vocab)] += 1
        logging.info("Template-majority baseline: {} template keys over {} training reactions.".format(
            len(self.counts), len(train)))

    def key(self, record: ReactionRecord) -> int:
        return template_key(self.fingerprint.fingerprint(record))

    def seen(self, record: ReactionRecord) -> bool:
        return self.key(record) in self.counts

    def predict(self, record: ReactionRecord, role: Role) -> RoleDistribution:
        key = self.key(record)
        if key not in self.counts:
            return self.prior[role]
        counts = self.counts[key][role]
        return RoleDistribution(role, counts / counts.sum())


def baseline_template_majority(train: Sequence[ReactionRecord], query: ReactionRecord, vocab: RoleVocabulary,
                               fingerprint: Optional[FingerprintParams] = None) -> RoleDistribution:
    """One-off form; evaluation builds a TemplateMajority once and reuses it."""
    return TemplateMajority(train, {vocab.role: vocab}, fingerprint).predict(query, vocab.role)
