#!/usr/bin/env python3
"""Read-only service state: the recommendation engine and the bounds every request is checked against."""
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from ..index import store
from ..ingest.bank import load_embedding_bank
from ..ingest.heads import load_head_probabilities
from ..ingest.reactions import by_id, by_split, load_reactions
from ..model.retrieval import RetrievalConfig
from ..model.roles import Split
from ..recommend.baselines import priors
from ..recommend.queries import RecommendationEngine
from ..util.configuration import Config, Section, Subsection
from ..util.decorators import timed
from ..util.errors import UsageError


@dataclass(frozen=True)
class ServiceConfig:
    index_path: str
    dataset_path: str
    bank_path: Optional[str] = None
    heads_paths: Tuple[str, ...] = field(default_factory=tuple)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    host: str = "127.0.0.1"
    port: int = 8080
    max_k: int = 100
    request_timeout: float = 10.0

    def __post_init__(self):
        if self.max_k < 1:
            raise UsageError("max_k must be at least 1, got {}.".format(self.max_k))
        if self.retrieval.k > self.max_k:
            raise UsageError("Default k {} exceeds max_k {}.".format(self.retrieval.k, self.max_k))
        if not self.request_timeout > 0:
            raise UsageError("Request timeout must be positive, got {}.".format(self.request_timeout))

    @staticmethod
    def from_config(index_path: str, dataset_path: str, bank_path: Optional[str] = None,
                    heads_paths: Sequence[str] = ()) -> "ServiceConfig":
        return ServiceConfig(index_path, dataset_path, bank_path, tuple(heads_paths), RetrievalConfig.from_config(),
                             Config.get(Section.service, Subsection.host),
                             Config.get_int(Section.service, Subsection.port),
                             Config.get_int(Section.service, Subsection.max_k),
                             Config.get_float(Section.service, Subsection.request_timeout))


@timed("load_engine")
def load_engine(index_path: str, dataset_path: str, retrieval: RetrievalConfig, bank_path: Optional[str] = None,
                heads_paths: Sequence[str] = ()) -> RecommendationEngine:
    """Index, train priors, optional bank and heads, and every dataset record for id queries."""
    index = store.load(index_path)
    records = load_reactions(dataset_path, Config.get(Section.data, Subsection.schema_version))
    prior = priors(by_split(records, Split.train), index.vocabs)
    bank = load_embedding_bank(bank_path) if bank_path else None
    heads = None
    if heads_paths:
        heads = load_head_probabilities(heads_paths)
        heads.check_vocabularies(index.vocabs)
    return RecommendationEngine(index, prior, retrieval, bank, heads, by_id(records))


class ServiceState:
    """Holds the engine once loaded.  Loading may run in a background thread."""

    def __init__(self, config: ServiceConfig, engine: Optional[RecommendationEngine] = None):
        self.config = config
        self.engine = engine
        self.load_error = None
        self._loaded = threading.Event()
        if engine is not None:
            self._loaded.set()

    @property
    def loaded(self) -> bool:
        return self._loaded.is_set() and self.engine is not None

    def load(self):
        try:
            self.engine = load_engine(self.config.index_path, self.config.dataset_path, self.config.retrieval,
                                      self.config.bank_path, self.config.heads_paths)
            logging.info("Service ready: {} precedents.".format(len(self.engine.index)))
        except Exception as e:
            self.load_error = e
            logging.error("Service failed to load its index: {}".format(e))
        finally:
            self._loaded.set()

    def load_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.load, name="index-loader", daemon=True)
        thread.start()
        return thread

    def wait(self, timeout: Optional[float] = None) -> bool:
        return self._loaded.wait(timeout)
