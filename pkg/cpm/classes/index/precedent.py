#!/usr/bin/env python3
"""Train-only precedent memory with exact top-k search.

Embedding keys are unit-normalized float32 rows scored by inner product.
Fingerprint keys are 0/1 rows scored by Tanimoto similarity.  Rows are scanned
in fixed-size blocks; a block keeps every row scoring at least its k-th best,
so the merge sees all boundary ties and the result equals a brute-force scan
ordered by (similarity descending, id ascending) for any thread count."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..fingerprint.drfp import FingerprintBank, FingerprintParams, ReactionFingerprint
from ..ingest.bank import EmbeddingBank
from ..model.records import ReactionRecord, remapped_labels
from ..model.roles import KeyKind, Role, ROLES, Split
from ..model.vocabulary import RoleVocabulary
from ..util.configuration import Config, Section, Subsection
from ..util.decorators import timed
from ..util.errors import DataError, DimensionError, SplitLeakageError, UsageError

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class Neighbor:
    id: str
    similarity: float
    labels: Tuple[int, ...]
    row: int = -1

    def label(self, role: Role) -> int:
        return self.labels[ROLES.index(role)]


def normalize_rows(matrix: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0)
    if len(zero):
        raise DataError("Retrieval key of '{}' has zero norm.".format(ids[zero[0]]))
    return (matrix / norms[:, None]).astype(np.float32)


class PrecedentIndex:
    def __init__(self, key_kind: KeyKind, ids: Sequence[str], keys: np.ndarray, labels: np.ndarray,
                 vocabs: Dict[Role, RoleVocabulary], fingerprint: Optional[FingerprintParams] = None,
                 block_size: Optional[int] = None):
        self.key_kind = key_kind
        self.ids = list(ids)
        self.keys = keys
        self.labels = np.ascontiguousarray(labels, dtype=np.int32).reshape(len(self.ids), len(ROLES))
        self.vocabs = vocabs
        self.fingerprint = fingerprint
        self.block_size = block_size or Config.get_int(Section.index, Subsection.block_size)
        if self.block_size < 1:
            raise UsageError("Index block size must be positive, got {}.".format(self.block_size))
        if keys.ndim != 2 or keys.shape[0] != len(self.ids):
            raise DimensionError("Index keys of shape {} do not match {} ids.".format(keys.shape, len(self.ids)))
        if key_kind == KeyKind.drfp and fingerprint is None:
            raise UsageError("A fingerprint index needs its fingerprint parameters.")
        self._rows = {reaction_id: i for i, reaction_id in enumerate(self.ids)}
        if len(self._rows) != len(self.ids):
            raise DataError("Index ids are not unique.")
        # rank of each row's id in ascending id order, the tie-break key
        order = sorted(range(len(self.ids)), key=self.ids.__getitem__)
        self.id_rank = np.empty(len(self.ids), dtype=np.int64)
        self.id_rank[order] = np.arange(len(self.ids))
        self._popcounts = None
        if key_kind == KeyKind.drfp:
            # counts stay exact in float32 up to 2**24 bits
            self._dense = keys.astype(np.float32)
            self._popcounts = keys.sum(axis=1, dtype=np.int64)

    def __len__(self):
        return len(self.ids)

    def __contains__(self, reaction_id):
        return reaction_id in self._rows

    @property
    def dim(self) -> int:
        return self.keys.shape[1]

    @property
    def is_fingerprint(self) -> bool:
        return self.key_kind == KeyKind.drfp

    def row_of(self, reaction_id: str) -> Optional[int]:
        return self._rows.get(reaction_id)

    def rows_of(self, reaction_ids: Iterable[str]) -> List[int]:
        return [self._rows[reaction_id] for reaction_id in reaction_ids if reaction_id in self._rows]

    def prepare_query(self, query) -> np.ndarray:
        """Checks the query dimension and normalizes embedding queries."""
        if isinstance(query, ReactionFingerprint):
            query = query.bits
        query = np.asarray(query)
        if query.ndim != 1 or len(query) != self.dim:
            raise DimensionError("Query has shape {}; the index expects {} dimensions.".format(query.shape, self.dim))
        if self.is_fingerprint:
            return query.astype(np.float32)
        query = query.astype(np.float64)
        if not np.all(np.isfinite(query)):
            raise DataError("Query vector has non-finite entries.")
        norm = np.linalg.norm(query)
        if norm == 0:
            raise DataError("Query vector has zero norm.")
        return (query / norm).astype(np.float32)

    def _score_block(self, query: np.ndarray, start: int, stop: int) -> np.ndarray:
        if not self.is_fingerprint:
            return (self.keys[start:stop] @ query).astype(np.float64)
        common = (self._dense[start:stop] @ query).astype(np.int64)
        union = self._popcounts[start:stop] + int(query.sum()) - common
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(union == 0, 1.0, common / np.where(union == 0, 1, union))

    def _block_candidates(self, query: np.ndarray, k: int, start: int, excluded: np.ndarray):
        stop = min(start + self.block_size, len(self))
        scores = self._score_block(query, start, stop)
        if len(excluded):
            local = excluded[(excluded >= start) & (excluded < stop)] - start
            scores[local] = -np.inf
        rows = np.flatnonzero(np.isfinite(scores))
        scores = scores[rows]
        if len(rows) > k:
            kth = np.partition(scores, len(scores) - k)[len(scores) - k]
            keep = scores >= kth
            rows, scores = rows[keep], scores[keep]
        return rows + start, scores

    def search(self, query, k: int, exclude: Optional[Iterable[int]] = None, threads: int = 1) -> List[Neighbor]:
        """Exact top-k neighbors, excluded rows removed before ranking."""
        if k < 1:
            raise UsageError("k must be at least 1, got {}.".format(k))
        query = self.prepare_query(query)
        if not len(self):
            return []
        excluded = np.unique(np.fromiter(exclude, dtype=np.int64)) if exclude is not None else np.empty(0, np.int64)
        starts = range(0, len(self), self.block_size)
        if threads > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda start: self._block_candidates(query, k, start, excluded), starts))
        else:
            parts = [self._block_candidates(query, k, start, excluded) for start in starts]
        rows = np.concatenate([part[0] for part in parts])
        scores = np.concatenate([part[1] for part in parts])
        order = np.lexsort((self.id_rank[rows], -scores))[:k]
        return [Neighbor(self.ids[row], float(scores[i]), tuple(int(x) for x in self.labels[row]), int(row))
                for i, row in zip(order, rows[order])]

    def search_many(self, queries: Sequence, k: int, excludes: Optional[Sequence[Iterable[int]]] = None,
                    threads: int = 1) -> List[List[Neighbor]]:
        """Searches every query independently; output order follows input order."""
        excludes = excludes if excludes is not None else [None] * len(queries)
        if len(excludes) != len(queries):
            raise DimensionError("{} exclusion sets for {} queries.".format(len(excludes), len(queries)))
        if threads > 1 and len(queries) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(lambda pair: self.search(pair[0], k, pair[1]), zip(queries, excludes)))
        return [self.search(query, k, exclude) for query, exclude in zip(queries, excludes)]

    def query_key(self, reaction: Union[ReactionRecord, str], source=None) -> np.ndarray:
        """Key of a reaction for this index: its fingerprint, or its bank row for embedding indexes."""
        if self.is_fingerprint:
            if not isinstance(reaction, ReactionRecord):
                raise UsageError("A fingerprint index needs the reaction itself, not only its id.")
            return self.fingerprint.fingerprint(reaction).bits.astype(np.uint8)
        if source is None:
            raise UsageError("An embedding index needs a bank to look up query keys.")
        reaction_id = reaction.id if isinstance(reaction, ReactionRecord) else reaction
        return source.keys(self.key_kind, source.row_of(reaction_id))


def _check_train(records: Sequence[ReactionRecord]):
    for record in records:
        if record.split != Split.train:
            raise SplitLeakageError("Record '{}' from the {} split cannot enter a precedent index.".format(
                record.id, record.split.value))


@timed("build_index")
def build_index(source: Union[EmbeddingBank, FingerprintBank, None], records: Sequence[ReactionRecord],
                key_kind: KeyKind, vocabs: Dict[Role, RoleVocabulary],
                fingerprint: Optional[FingerprintParams] = None, block_size: Optional[int] = None) -> PrecedentIndex:
    """Rows follow record order.  Embedding keys come from the bank; fingerprint keys from the
    fingerprint bank when given, otherwise they are computed from the records."""
    key_kind = KeyKind.parse(key_kind) if isinstance(key_kind, str) and not isinstance(key_kind, KeyKind) else key_kind
    _check_train(records)
    ids = [record.id for record in records]
    labels = np.array([[remapped_labels(record, vocabs)[role] for role in ROLES] for record in records],
                      dtype=np.int32).reshape(len(records), len(ROLES))

    if key_kind == KeyKind.drfp:
        fingerprint = fingerprint or FingerprintParams.from_config()
        if isinstance(source, FingerprintBank):
            if source.nbits != fingerprint.nbits:
                raise DimensionError("Fingerprint bank has {} bits; the index expects {}.".format(
                    source.nbits, fingerprint.nbits))
            keys = source.bits[[source.row_of(reaction_id) for reaction_id in ids]].reshape(len(ids), source.nbits)
        else:
            keys = FingerprintBank.from_records(records, fingerprint).bits
        keys = np.ascontiguousarray(keys, dtype=np.uint8)
    else:
        if not isinstance(source, EmbeddingBank):
            raise UsageError("Key kind '{}' needs an embedding bank.".format(key_kind.value))
        raw = source.keys(key_kind, source.rows_of(ids)).reshape(len(ids), source.key_dim(key_kind))
        keys = normalize_rows(raw, ids)
        fingerprint = None

    index = PrecedentIndex(key_kind, ids, keys, labels, vocabs, fingerprint, block_size)
    logging.info("Built {} index: {} train precedents, D={}.".format(key_kind.value, len(index), index.dim))
    return index
