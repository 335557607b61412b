#!/usr/bin/env python3
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .attention import softmax
from ..util.errors import DimensionError, NonFiniteError


@dataclass(frozen=True)
class RolePooledPair:
    """Pooled reactant-side vector r and product-side vector p."""
    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        if r.ndim != 1 or r.shape != p.shape:
            raise DimensionError("r and p must be vectors of equal length, got {} and {}.".format(r.shape, p.shape))
        for name, vector in (("r", r), ("p", p)):
            if not np.all(np.isfinite(vector)):
                raise NonFiniteError(0, "pooled {}".format(name))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return len(self.r)


def delta_sigma(pair: RolePooledPair) -> Tuple[np.ndarray, np.ndarray]:
    """(p - r, p + r)."""
    return pair.p - pair.r, pair.p + pair.r


def reconstruct(z_delta: np.ndarray, z_sigma: np.ndarray) -> RolePooledPair:
    return RolePooledPair(r=(z_sigma - z_delta) / 2, p=(z_sigma + z_delta) / 2)


def role_pool(atoms: np.ndarray, scorer: np.ndarray, bias: float = 0.0) -> np.ndarray:
    """Weighted mean of atom rows; weights are a softmax over atoms of a linear score."""
    atoms = np.asarray(atoms, dtype=np.float64)
    if atoms.ndim != 2 or atoms.shape[0] == 0:
        raise DimensionError("Pooling needs a non-empty [atoms x d] matrix, got shape {}.".format(atoms.shape))
    if scorer.shape != (atoms.shape[1],):
        raise DimensionError("Pooling scorer has shape {}, atoms have width {}.".format(scorer.shape, atoms.shape[1]))
    weights = softmax(atoms @ scorer + bias)
    return weights @ atoms
