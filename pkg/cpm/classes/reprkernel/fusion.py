#!/usr/bin/env python3
from dataclasses import dataclass
from typing import Dict

import numpy as np

from .attention import softmax
from ..util.errors import DimensionError, SimplexError

STREAMS = ("rp_context", "difference", "sum", "engineered", "dft", "center_difference")
GATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StreamSet:
    """Six projected stream vectors (rows, in STREAMS order) and their gate weights."""
    streams: np.ndarray
    gates: np.ndarray

    def __post_init__(self):
        streams = np.asarray(self.streams, dtype=np.float64)
        gates = np.asarray(self.gates, dtype=np.float64)
        if streams.ndim != 2 or streams.shape[0] != len(STREAMS):
            raise DimensionError("Expected {} stream rows, got shape {}.".format(len(STREAMS), streams.shape))
        if gates.shape != (len(STREAMS),):
            raise DimensionError("Expected {} gate weights, got shape {}.".format(len(STREAMS), gates.shape))
        object.__setattr__(self, "streams", streams)
        object.__setattr__(self, "gates", gates)

    @staticmethod
    def from_dict(streams: Dict[str, np.ndarray], gates) -> "StreamSet":
        missing = [name for name in STREAMS if name not in streams]
        if missing:
            raise DimensionError("Missing streams: {}.".format(", ".join(missing)))
        return StreamSet(np.stack([streams[name] for name in STREAMS]), gates)

    @property
    def dim(self) -> int:
        return self.streams.shape[1]


def compute_gates(streams: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Linear map of the concatenated streams to one logit per stream, then softmax."""
    return softmax(streams.reshape(-1) @ weight + bias)


def gated_fusion(streams: StreamSet) -> np.ndarray:
    gates = streams.gates
    if np.any(gates < 0) or abs(gates.sum() - 1.0) > GATE_TOLERANCE:
        raise SimplexError("Gate weights {} are not normalized.".format(gates.tolist()))
    return gates @ streams.streams
