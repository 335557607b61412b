#!/usr/bin/env python3
"""Cross-attention from product atoms to reactant atoms with an additive atom-map bias.

    out_h = softmax(Q_h K_h^T / sqrt(d_h) + beta_h M) V_h

M is a 0/1 [n_p x n_r] map from product atoms to reactant atoms.  An empty M
skips the addition altogether, so the kernel reduces to plain scaled
dot-product attention bit for bit."""
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..util.errors import DimensionError


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exp_x = np.exp(shifted)
    return exp_x / np.sum(exp_x, axis=axis, keepdims=True)


def scaled_dot_product_attention(q: np.ndarray, k: np.ndarray, v: np.ndarray,
                                 bias: Optional[np.ndarray] = None) -> np.ndarray:
    scores = (q @ k.T) / math.sqrt(q.shape[-1])
    if bias is not None:
        scores = scores + bias
    return softmax(scores, axis=-1) @ v


@dataclass(frozen=True)
class AttentionInputs:
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    heads: int
    head_dim: int
    mask: Optional[np.ndarray] = None
    beta: Union[float, np.ndarray] = 0.0

    def __post_init__(self):
        width = self.heads * self.head_dim
        if self.heads < 1 or self.head_dim < 1:
            raise DimensionError("heads and head_dim must be positive, got {} and {}.".format(self.heads, self.head_dim))
        for name in ("q", "k", "v"):
            matrix = np.asarray(getattr(self, name), dtype=np.float64)
            if matrix.ndim != 2 or matrix.shape[1] != width:
                raise DimensionError("{} must be [n x {}], got shape {}.".format(name, width, matrix.shape))
            object.__setattr__(self, name, matrix)
        if self.k.shape[0] != self.v.shape[0]:
            raise DimensionError("k has {} rows but v has {}.".format(self.k.shape[0], self.v.shape[0]))
        if self.k.shape[0] == 0:
            raise DimensionError("Attention needs at least one reactant atom.")

        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.ndim == 0:
            beta = np.full(self.heads, float(beta))
        if beta.shape != (self.heads,):
            raise DimensionError("beta must be a scalar or one value per head, got shape {}.".format(beta.shape))
        object.__setattr__(self, "beta", beta)

        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=np.float64)
            if mask.size == 0:
                mask = None
            elif mask.shape != (self.q.shape[0], self.k.shape[0]):
                raise DimensionError("Atom map must be [{} x {}], got shape {}.".format(
                    self.q.shape[0], self.k.shape[0], mask.shape))
            elif not np.all((mask == 0) | (mask == 1)):
                raise DimensionError("Atom map entries must be 0 or 1.")
            object.__setattr__(self, "mask", mask)

    @property
    def has_mask(self) -> bool:
        return self.mask is not None


def biased_cross_attention(inputs: AttentionInputs) -> np.ndarray:
    """Returns [n_p x heads*head_dim]; each head's rows are convex combinations of that head's v rows."""
    out = np.empty((inputs.q.shape[0], inputs.heads * inputs.head_dim))
    for h in range(inputs.heads):
        columns = slice(h * inputs.head_dim, (h + 1) * inputs.head_dim)
        bias = inputs.beta[h] * inputs.mask if inputs.has_mask else None
        out[:, columns] = scaled_dot_product_attention(inputs.q[:, columns], inputs.k[:, columns],
                                                       inputs.v[:, columns], bias)
    return out


def attention_weights(inputs: AttentionInputs, head: int) -> np.ndarray:
    columns = slice(head * inputs.head_dim, (head + 1) * inputs.head_dim)
    scores = (inputs.q[:, columns] @ inputs.k[:, columns].T) / math.sqrt(inputs.head_dim)
    if inputs.has_mask:
        scores = scores + inputs.beta[head] * inputs.mask
    return softmax(scores, axis=-1)
