#!/usr/bin/env python3
"""Top-k accuracy against multi-hot targets, and the absent/present breakdown.

A row is correct at k when any of its valid classes appears among the k
highest-ranked predicted classes.  The absent/present split partitions rows by
the record's own label, so all@1 always reconstructs from the two halves."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..model.distributions import present_only_view, rank_classes
from ..model.records import MultiHotTarget
from ..model.roles import Role
from ..model.vocabulary import ABSENT
from ..util.errors import DimensionError, UsageError

TOP_KS = (1, 3, 5)


def _ranked(predictions) -> np.ndarray:
    ranked = np.asarray(predictions)
    if ranked.ndim != 2:
        raise DimensionError("Predictions must be [rows x ranked classes], got shape {}.".format(ranked.shape))
    return ranked


def correct_at(predictions, targets: Sequence[MultiHotTarget], k: int) -> np.ndarray:
    """Boolean per row: any valid class among the first k ranked predictions."""
    if k < 1:
        raise UsageError("k must be at least 1, got {}.".format(k))
    ranked = _ranked(predictions)
    if len(ranked) != len(targets):
        raise DimensionError("{} prediction rows for {} targets.".format(len(ranked), len(targets)))
    top = ranked[:, :k]
    return np.array([any(int(c) in target.valid_labels for c in row) for row, target in zip(top, targets)],
                    dtype=bool)


def topk_accuracy(predictions, targets: Sequence[MultiHotTarget], k: int) -> float:
    if not len(targets):
        return 0.0
    return float(correct_at(predictions, targets, k).mean())


def absent_rows(targets: Sequence[MultiHotTarget], gold: Optional[Sequence[int]] = None) -> np.ndarray:
    """Rows whose own label is the absent class; without gold labels, rows whose only valid class is absent."""
    if gold is not None:
        if len(gold) != len(targets):
            raise DimensionError("{} gold labels for {} targets.".format(len(gold), len(targets)))
        return np.asarray(gold) == ABSENT
    return np.array([target.valid_labels == frozenset([ABSENT]) for target in targets], dtype=bool)


@dataclass(frozen=True)
class AbsentAuditRow:
    role: Role
    rows: int
    absent: int
    all_at1: float
    present_at1: Optional[float]
    absent_at1: Optional[float]
    present_masked_at1: Optional[float] = None

    @property
    def present(self) -> int:
        return self.rows - self.absent

    @property
    def absent_share(self) -> float:
        return self.absent / self.rows if self.rows else 0.0

    def reconstructed_all_at1(self) -> float:
        """(n_present * present@1 + n_absent * absent@1) / n."""
        if not self.rows:
            return 0.0
        present = self.present * (self.present_at1 or 0.0)
        absent = self.absent * (self.absent_at1 or 0.0)
        return (present + absent) / self.rows

    def to_dict(self) -> dict:
        return {"rows": self.rows, "absent": self.absent, "absent_share": self.absent_share,
                "all@1": self.all_at1, "present@1": self.present_at1, "absent@1": self.absent_at1,
                "present_masked@1": self.present_masked_at1}


def _mean_or_none(values: np.ndarray) -> Optional[float]:
    return float(values.mean()) if len(values) else None


def absent_audit(role: Role, probs: np.ndarray, targets: Sequence[MultiHotTarget],
                 gold: Optional[Sequence[int]] = None) -> AbsentAuditRow:
    """all@1, present@1 and absent@1 of unmasked predictions, plus present@1 after masking class 0."""
    probs = np.asarray(probs, dtype=np.float64)
    correct = correct_at(rank_classes(probs), targets, 1)
    absent = absent_rows(targets, gold)
    present = ~absent

    masked = None
    if present.any():
        # present rows always carry at least one present class
        present_targets = [MultiHotTarget(role, target.valid_labels - {ABSENT}, target.size_with_absent)
                           for target, keep in zip(targets, present) if keep]
        masked = topk_accuracy(rank_classes(present_only_view(probs[present])), present_targets, 1)

    return AbsentAuditRow(role=role, rows=len(targets), absent=int(absent.sum()),
                          all_at1=float(correct.mean()) if len(correct) else 0.0,
                          present_at1=_mean_or_none(correct[present]),
                          absent_at1=_mean_or_none(correct[absent]),
                          present_masked_at1=masked)


@dataclass(frozen=True)
class RoleMetrics:
    role: Role
    accuracy: dict
    audit: AbsentAuditRow

    def acc(self, k: int) -> float:
        return self.accuracy[k]

    def to_dict(self) -> dict:
        d = {"acc@{}".format(k): v for k, v in sorted(self.accuracy.items())}
        d["audit"] = self.audit.to_dict()
        return d


def role_metrics(role: Role, probs: np.ndarray, targets: Sequence[MultiHotTarget],
                 gold: Optional[Sequence[int]] = None, ks=TOP_KS) -> RoleMetrics:
    ranked = rank_classes(np.asarray(probs, dtype=np.float64))
    return RoleMetrics(role, {k: topk_accuracy(ranked, targets, k) for k in ks},
                       absent_audit(role, probs, targets, gold))
