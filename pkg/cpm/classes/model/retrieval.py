#!/usr/bin/env python3
import math
import numbers
from dataclasses import dataclass
from typing import Optional

from .roles import KeyKind
from ..util.configuration import Config, Section, Subsection
from ..util.errors import UsageError

UNIFORM = "uniform"


def parse_temperature(raw) -> Optional[float]:
    """'uniform' -> None; anything else must be a positive float."""
    if raw is None:
        return None
    if isinstance(raw, str):
        if raw.strip().lower() == UNIFORM:
            return None
        try:
            raw = float(raw)
        except ValueError:
            raise UsageError("Temperature '{}' is neither 'uniform' nor a number.".format(raw))
    t = float(raw)
    if not t > 0 or not math.isfinite(t):
        raise UsageError("Temperature must be a positive finite number, got {}.".format(t))
    return t


def format_temperature(t: Optional[float]) -> str:
    return UNIFORM if t is None else repr(float(t))


@dataclass(frozen=True)
class RetrievalConfig:
    key_kind: KeyKind = KeyKind.rxn_only
    k: int = 10
    temperature: Optional[float] = None
    alpha: float = 0.5

    def __post_init__(self):
        if isinstance(self.key_kind, str) and not isinstance(self.key_kind, KeyKind):
            object.__setattr__(self, "key_kind", KeyKind.parse(self.key_kind))
        if not isinstance(self.k, numbers.Integral) or isinstance(self.k, bool) or self.k < 1:
            raise UsageError("k must be a positive integer, got {!r}.".format(self.k))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "temperature", parse_temperature(self.temperature))
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= 1.0:
            raise UsageError("alpha must lie in [0, 1], got {}.".format(alpha))
        object.__setattr__(self, "alpha", alpha)

    @property
    def uniform(self) -> bool:
        return self.temperature is None

    def selection_order(self):
        """Tie-break order for grid selection: smaller k, smaller t (uniform last), key kind order."""
        t = math.inf if self.temperature is None else self.temperature
        return self.k, t, self.key_kind.order

    def with_overrides(self, k=None, temperature=None, alpha=None) -> "RetrievalConfig":
        return RetrievalConfig(self.key_kind,
                               self.k if k is None else k,
                               self.temperature if temperature is None else temperature,
                               self.alpha if alpha is None else alpha)

    def to_dict(self) -> dict:
        return {"key": self.key_kind.value, "k": self.k,
                "temperature": format_temperature(self.temperature), "alpha": self.alpha}

    @staticmethod
    def from_dict(d: dict) -> "RetrievalConfig":
        return RetrievalConfig(KeyKind.parse(d["key"]), int(d["k"]), d["temperature"], float(d["alpha"]))

    @staticmethod
    def from_config() -> "RetrievalConfig":
        return RetrievalConfig(KeyKind.parse(Config.get(Section.retrieval, Subsection.key)),
                               Config.get_int(Section.retrieval, Subsection.k),
                               Config.get(Section.retrieval, Subsection.temperature),
                               Config.get_float(Section.retrieval, Subsection.alpha))

    def __str__(self):
        return "RetrievalConfig(key={}, k={}, t={}, alpha={})".format(
            self.key_kind.value, self.k, format_temperature(self.temperature), self.alpha)
