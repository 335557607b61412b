#!/usr/bin/env python3
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .roles import Role
from .vocabulary import ABSENT
from ..util.errors import SimplexError

SIMPLEX_TOLERANCE = 1e-9


def check_simplex(probs: np.ndarray, tolerance: float = SIMPLEX_TOLERANCE, what: str = "distribution"):
    """Entries non-negative and summing to one along the last axis."""
    if not np.all(np.isfinite(probs)):
        raise SimplexError("{} has non-finite entries.".format(what))
    if np.any(probs < 0):
        raise SimplexError("{} has negative entries (min {}).".format(what, probs.min()))
    sums = probs.sum(axis=-1)
    worst = float(np.max(np.abs(sums - 1.0))) if np.size(sums) else 0.0
    if worst > tolerance:
        raise SimplexError("{} sums deviate from 1 by {:.3g} (tolerance {:.1g}).".format(what, worst, tolerance))


def rank_classes(probs: np.ndarray) -> np.ndarray:
    """Class indices by probability descending, ties by ascending class index.  Works row-wise on 2-D input."""
    return np.argsort(-probs, axis=-1, kind="stable")


@dataclass(frozen=True)
class RoleDistribution:
    role: Role
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise SimplexError("A {} distribution must be a vector, got shape {}.".format(self.role.value, probs.shape))
        check_simplex(probs, what="{} distribution".format(self.role.value))
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (isinstance(other, RoleDistribution) and self.role == other.role
                and np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash((self.role, self.probs.tobytes()))

    @property
    def size(self) -> int:
        return len(self.probs)

    def ranked(self) -> List[Tuple[int, float]]:
        return [(int(i), float(self.probs[i])) for i in rank_classes(self.probs)]

    def top(self) -> int:
        return int(rank_classes(self.probs)[0])


def present_only_view(probs: np.ndarray) -> np.ndarray:
    """Masks the absent class and renormalizes over present classes (row-wise).

    A row with no present mass becomes uniform over present classes."""
    probs = np.array(probs, dtype=np.float64)
    masked = probs.copy()
    masked[..., ABSENT] = 0.0
    totals = masked.sum(axis=-1, keepdims=True)
    n_present = probs.shape[-1] - 1
    uniform = np.full_like(masked, 1.0 / n_present)
    uniform[..., ABSENT] = 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        renormalized = np.where(totals > 0, masked / np.where(totals > 0, totals, 1.0), uniform)
    return renormalized
