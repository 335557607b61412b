#!/usr/bin/env python3
"""Paired nonparametric bootstrap over evaluation rows.

Resamples are drawn in fixed chunks of CHUNK_RESAMPLES.  Chunk c uses a
PCG64 generator seeded with splitmix64_stream(seed, c), so results depend only
on (seed, resamples, n) and never on how many workers ran the chunks.  Each
resample draws n row indices uniformly with replacement and records
mean(b - a) over them; the interval is the percentile interval of those
means (numpy linear interpolation)."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..util.configuration import Config, Section, Subsection
from ..util.errors import DataError, DimensionError, UsageError
from ..util.hashing import splitmix64_stream

CHUNK_RESAMPLES = 100
CI_METHOD = "percentile"


@dataclass(frozen=True)
class BootstrapConfig:
    resamples: int = 10000
    seed: int = 20240607
    confidence: float = 0.95

    def __post_init__(self):
        if self.resamples < 1:
            raise UsageError("Bootstrap needs at least one resample, got {}.".format(self.resamples))
        if not 0.0 < self.confidence < 1.0:
            raise UsageError("Confidence must lie strictly between 0 and 1, got {}.".format(self.confidence))

    @staticmethod
    def from_config() -> "BootstrapConfig":
        return BootstrapConfig(Config.get_int(Section.bootstrap, Subsection.resamples),
                               Config.get_int(Section.bootstrap, Subsection.seed),
                               Config.get_float(Section.bootstrap, Subsection.confidence))

    def to_dict(self) -> dict:
        return {"resamples": self.resamples, "seed": self.seed, "confidence": self.confidence,
                "method": CI_METHOD, "generator": "splitmix64-seeded PCG64, {} resamples per chunk".format(
                    CHUNK_RESAMPLES)}


@dataclass(frozen=True)
class BootstrapResult:
    delta: float
    lower: float
    upper: float
    rows: int
    config: BootstrapConfig

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def excludes_zero(self) -> bool:
        return not self.contains(0.0)

    def to_dict(self) -> dict:
        return {"delta": self.delta, "lower": self.lower, "upper": self.upper, "rows": self.rows}


def _chunk_means(diff: np.ndarray, seed: int, chunk: int, count: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(splitmix64_stream(seed, chunk)))
    rows = rng.integers(0, len(diff), size=(count, len(diff)))
    return diff[rows].mean(axis=1)


def resample_means(diff: np.ndarray, cfg: BootstrapConfig, threads: int = 1) -> np.ndarray:
    chunks = [(c, min(CHUNK_RESAMPLES, cfg.resamples - c * CHUNK_RESAMPLES))
              for c in range((cfg.resamples + CHUNK_RESAMPLES - 1) // CHUNK_RESAMPLES)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda chunk: _chunk_means(diff, cfg.seed, *chunk), chunks))
    else:
        parts = [_chunk_means(diff, cfg.seed, *chunk) for chunk in chunks]
    return np.concatenate(parts)


def paired_bootstrap(correct_a, correct_b, cfg: BootstrapConfig = BootstrapConfig(),
                     threads: int = 1) -> BootstrapResult:
    """mean(b) - mean(a) with a percentile interval; rows are paired by position."""
    a = np.asarray(correct_a, dtype=np.float64)
    b = np.asarray(correct_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError("Paired bootstrap needs two equal-length vectors, got {} and {}.".format(a.shape, b.shape))
    if not len(a):
        raise DataError("Paired bootstrap needs at least one row.")
    diff = b - a
    means = resample_means(diff, cfg, threads)
    tail = 100.0 * (1.0 - cfg.confidence) / 2.0
    lower, upper = np.percentile(means, [tail, 100.0 - tail])
    result = BootstrapResult(float(diff.mean()), float(lower), float(upper), len(diff), cfg)
    logging.debug("Bootstrap over {} rows: delta {:.4f}, CI [{:.4f}, {:.4f}].".format(
        len(diff), result.delta, result.lower, result.upper))
    return result
