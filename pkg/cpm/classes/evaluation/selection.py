#!/usr/bin/env python3
"""Validation-selected retrieval: pick (key, k, t) on a hashed hold-out of the training split."""
import itertools
import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from .metrics import topk_accuracy
from .predictors import knn_predictions, query_keys
from ..fingerprint.drfp import FingerprintParams
from ..index.precedent import build_index
from ..ingest.bank import EmbeddingBank
from ..model.distributions import rank_classes
from ..model.records import ReactionRecord, row_targets
from ..model.retrieval import RetrievalConfig, parse_temperature
from ..model.roles import KeyKind, Role, ROLES, Split
from ..model.vocabulary import RoleVocabulary
from ..recommend.baselines import priors
from ..util.configuration import Config, Section, Subsection
from ..util.errors import SplitLeakageError, UsageError

METRIC_REGEX = re.compile(r"^(?P<scope>mean|catalyst|solvent|reagent)_acc@(?P<k>\d+)$")


@dataclass(frozen=True)
class TargetMetric:
    scope: str
    k: int

    @staticmethod
    def parse(s: str) -> "TargetMetric":
        match = METRIC_REGEX.match(s.strip().lower())
        if not match or int(match.group("k")) < 1:
            raise UsageError("Target metric '{}' must look like mean_acc@1 or reagent_acc@3.".format(s))
        return TargetMetric(match.group("scope"), int(match.group("k")))

    def score(self, accuracies: Dict[Role, float]) -> float:
        if self.scope == "mean":
            return float(np.mean([accuracies[role] for role in ROLES]))
        return accuracies[Role(self.scope)]

    def __str__(self):
        return "{}_acc@{}".format(self.scope, self.k)


@dataclass(frozen=True)
class CandidateScore:
    config: RetrievalConfig
    score: float
    accuracies: Dict[Role, float]

    def to_dict(self) -> dict:
        d = self.config.to_dict()
        d["score"] = self.score
        d.update({"{}_acc".format(role.value): acc for role, acc in self.accuracies.items()})
        return d


@dataclass(frozen=True)
class SelectionResult:
    winner: RetrievalConfig
    metric: TargetMetric
    table: List[CandidateScore]
    selection_train: int
    selection_validation: int

    def to_dict(self) -> dict:
        return {"winner": self.winner.to_dict(), "metric": str(self.metric),
                "selection_train": self.selection_train, "selection_validation": self.selection_validation,
                "candidates": [candidate.to_dict() for candidate in self.table]}


def build_grid(keys: Sequence, ks: Sequence[int], temperatures: Sequence, alpha: float = 0.5) -> List[RetrievalConfig]:
    return [RetrievalConfig(KeyKind.parse(key) if isinstance(key, str) else key, int(k), parse_temperature(t), alpha)
            for key, k, t in itertools.product(keys, ks, temperatures)]


def _grid_ks() -> List[int]:
    raw = Config.get_list(Section.selection, Subsection.grid_k)
    try:
        return [int(k) for k in raw]
    except ValueError:
        raise UsageError("Config value [selection] grid_k = '{}' is not a list of integers.".format(", ".join(raw)))


def grid_from_config(alpha: Optional[float] = None) -> List[RetrievalConfig]:
    return build_grid(Config.get_list(Section.selection, Subsection.grid_keys), _grid_ks(),
                      Config.get_list(Section.selection, Subsection.grid_t),
                      Config.get_float(Section.retrieval, Subsection.alpha) if alpha is None else alpha)


def check_selection_hygiene(*groups: Sequence[ReactionRecord]):
    """Selection only ever sees the training split."""
    for group in groups:
        for record in group:
            if record.split != Split.train:
                raise SplitLeakageError("Record '{}' from the {} split reached validation selection.".format(
                    record.id, record.split.value))


def select_retrieval(grid: Sequence[RetrievalConfig], selection_train: Sequence[ReactionRecord],
                     selection_validation: Sequence[ReactionRecord], metric: TargetMetric,
                     vocabs: Dict[Role, RoleVocabulary], bank: Optional[EmbeddingBank] = None,
                     fingerprint: Optional[FingerprintParams] = None, threads: int = 1) -> SelectionResult:
    """Scores every candidate's neighbor vote on selection-validation against an index of selection-train.

    Ties go to the smaller k, then the smaller temperature (uniform last), then key order."""
    if not grid:
        raise UsageError("The selection grid is empty.")
    if not selection_validation:
        raise UsageError("Selection-validation is empty; raise the validation fraction.")
    check_selection_hygiene(selection_train, selection_validation)

    rows = row_targets(list(selection_validation), vocabs)
    targets = {role: [row[role] for row in rows] for role in ROLES}
    prior = priors(selection_train, vocabs)
    table = []
    for key_kind in sorted({candidate.key_kind for candidate in grid}, key=lambda kind: kind.order):
        candidates = [candidate for candidate in grid if candidate.key_kind == key_kind]
        index = build_index(bank, selection_train, key_kind, vocabs, fingerprint)
        keys = query_keys(index, selection_validation, bank)
        widest = max(candidate.k for candidate in candidates)
        neighbors = index.search_many(keys, widest, threads=threads)
        for candidate in candidates:
            predictions, _ = knn_predictions(index, neighbors, candidate, prior)
            accuracies = {role: topk_accuracy(rank_classes(predictions.probs[role]), targets[role], metric.k)
                          for role in ROLES}
            table.append(CandidateScore(candidate, metric.score(accuracies), accuracies))
            logging.debug("Selection candidate {}: {} = {:.4f}.".format(candidate, metric, table[-1].score))

    best = min(table, key=lambda c: (-c.score,) + c.config.selection_order())
    logging.info("Selected {} with validation {} = {:.4f} over {} candidates.".format(
        best.config, metric, best.score, len(table)))
    return SelectionResult(best.config, metric, table, len(selection_train), len(selection_validation))
