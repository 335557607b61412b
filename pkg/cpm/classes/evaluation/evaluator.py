#!/usr/bin/env python3
"""Runs the matched predictor suite on the test split and assembles an EvalReport.

Predictors, in report order:
    prior               train frequencies of remapped classes
    template_majority   label counts per template key, prior on unseen templates
    drfp_knn            neighbor vote over an exact Tanimoto fingerprint index
    knn                 neighbor vote over learned keys (needs a bank)
    head                ingested head probabilities (needs heads for every role)
    hybrid              alpha * head + (1 - alpha) * knn"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from .audit import ExclusionRung, overlap_audit
from .bootstrap import BootstrapConfig, paired_bootstrap
from .metrics import correct_at, role_metrics
from .predictors import (DRFP_KNN, KNN, Predictions, head_predictions, hybrid_predictions, knn_predictions,
                         prior_predictions, query_keys, template_predictions)
from .report import Comparison, EvalReport, comparison_pairs
from .selection import SelectionResult
from ..fingerprint.drfp import FingerprintParams
from ..index.precedent import PrecedentIndex, build_index
from ..ingest.bank import EmbeddingBank
from ..ingest.heads import HeadProbabilities
from ..ingest.reactions import by_id, by_split, dataset_profile
from ..model.distributions import rank_classes
from ..model.records import ReactionRecord, duplicate_group_count, remapped_labels, row_targets
from ..model.retrieval import RetrievalConfig
from ..model.roles import KeyKind, Role, ROLES, Split
from ..model.vocabulary import RoleVocabulary
from ..recommend.baselines import TemplateMajority, priors
from ..util.configuration import get_version
from ..util.decorators import timed
from ..util.errors import DataError

TEMPLATE_KEY_DESCRIPTION = "fnv1a-64 over the comma-joined active fingerprint bit positions"


class EvaluationData:
    """Test rows with their multi-hot targets and gold classes per role."""

    def __init__(self, records: Sequence[ReactionRecord], vocabs: Dict[Role, RoleVocabulary]):
        self.train = by_split(records, Split.train)
        self.test = by_split(records, Split.test)
        if not self.train:
            raise DataError("Evaluation needs at least one train record.")
        if not self.test:
            raise DataError("Evaluation needs at least one test record.")
        rows = row_targets(self.test, vocabs)
        self.targets = {role: [row[role] for row in rows] for role in ROLES}
        labels = [remapped_labels(record, vocabs) for record in self.test]
        self.gold = {role: np.array([row[role] for row in labels], dtype=np.int64) for role in ROLES}
        self.ids = [record.id for record in self.test]
        self.profile = dataset_profile(records)


def _knn(index: PrecedentIndex, data: EvaluationData, retrieval: RetrievalConfig, prior, bank, threads, name):
    neighbors = index.search_many(query_keys(index, data.test, bank), retrieval.k, threads=threads)
    predictions, fallbacks = knn_predictions(index, neighbors, retrieval, prior, name)
    if fallbacks:
        logging.warning("{}: {} test rows had no neighbors and used the prior.".format(name, fallbacks))
    return predictions


def _head(heads: Optional[HeadProbabilities], data: EvaluationData) -> Optional[Predictions]:
    if heads is None:
        return None
    missing = [role.value for role in ROLES if role not in heads.roles]
    if missing:
        logging.warning("Head probabilities are missing for {}; head and hybrid are not evaluated.".format(
            ", ".join(missing)))
        return None
    return head_predictions(heads, data.ids)


def _comparisons(predictions: Dict[str, Predictions], data: EvaluationData, cfg: BootstrapConfig,
                 threads: int) -> List[Comparison]:
    comparisons = []
    for a, b in comparison_pairs(list(predictions)):
        for role in ROLES:
            correct_a = correct_at(rank_classes(predictions[a].probs[role]), data.targets[role], 1)
            correct_b = correct_at(rank_classes(predictions[b].probs[role]), data.targets[role], 1)
            comparisons.append(Comparison(role, a, b, paired_bootstrap(correct_a, correct_b, cfg, threads)))
    return comparisons


@timed("evaluate")
def evaluate(records: Sequence[ReactionRecord], vocabs: Dict[Role, RoleVocabulary], retrieval: RetrievalConfig,
             bank: Optional[EmbeddingBank] = None, heads: Optional[HeadProbabilities] = None,
             fingerprint: Optional[FingerprintParams] = None, bootstrap: BootstrapConfig = BootstrapConfig(),
             threads: int = 1, rungs: Sequence[ExclusionRung] = (), audit_k: int = 5,
             audit_role: Role = Role.reagent, selection: Optional[SelectionResult] = None,
             provenance: Optional[dict] = None) -> EvalReport:
    """Indexes only the train split; every metric is computed on the test split."""
    data = EvaluationData(records, vocabs)
    fingerprint = fingerprint or FingerprintParams.from_config()
    if heads is not None:
        heads.check_vocabularies(vocabs)
    prior = priors(data.train, vocabs)

    predictions = {}
    for p in (prior_predictions(prior, len(data.test)),
              template_predictions(TemplateMajority(data.train, vocabs, fingerprint), data.test)):
        predictions[p.name] = p

    drfp_index = build_index(None, data.train, KeyKind.drfp, vocabs, fingerprint)
    drfp_config = RetrievalConfig(KeyKind.drfp, retrieval.k, retrieval.temperature, retrieval.alpha)
    predictions[DRFP_KNN] = _knn(drfp_index, data, drfp_config, prior, None, threads, DRFP_KNN)

    knn_index = drfp_index
    if retrieval.key_kind == KeyKind.drfp:
        predictions[KNN] = Predictions(KNN, predictions[DRFP_KNN].probs)
    elif bank is not None:
        knn_index = build_index(bank, data.train, retrieval.key_kind, vocabs)
        predictions[KNN] = _knn(knn_index, data, retrieval, prior, bank, threads, KNN)
    else:
        logging.warning("No embedding bank; the learned-key k-NN and hybrid are not evaluated.")

    head = _head(heads, data)
    if head is not None:
        predictions[head.name] = head
        if KNN in predictions:
            hybrid = hybrid_predictions(head, predictions[KNN], retrieval.alpha)
            predictions[hybrid.name] = hybrid

    provenance = dict(provenance or {})
    provenance.setdefault("version", get_version())
    provenance["fingerprint"] = fingerprint.to_dict()
    provenance["template_key"] = TEMPLATE_KEY_DESCRIPTION
    counts = {"train": len(data.train), "test": len(data.test),
              "test_duplicate_groups": duplicate_group_count(data.test), "profile": data.profile}
    report = EvalReport(retrieval, bootstrap, provenance, counts, selection=selection)
    for name, p in predictions.items():
        report.add_predictor(name, {role: role_metrics(role, p.probs[role], data.targets[role], data.gold[role])
                                    for role in ROLES})
        logging.info("{}: mean@1 {:.4f}.".format(name, report.primary(name)))

    report.comparisons = _comparisons(predictions, data, bootstrap, threads)
    if rungs:
        audit_keys = query_keys(knn_index, data.test, bank if knn_index.key_kind != KeyKind.drfp else None)
        report.overlap = overlap_audit(knn_index, data.test, audit_keys, data.targets[audit_role],
                                       by_id(data.train), rungs, audit_k, role=audit_role)
    return report
