#!/usr/bin/env python3
import logging
from typing import List, Optional, Sequence

import numpy as np

from .container import atomic_write, decode_bank, encode_bank, role_tag_of
from ..model.roles import KeyKind
from ..util.errors import DataError, DimensionError, FormatError, NonFiniteError, UnknownReactionError


class EmbeddingBank:
    """Dense reaction vectors keyed by reaction id: z_rxn [n x d] and optionally z_delta [n x d]."""

    def __init__(self, ids: Sequence[str], z_rxn: np.ndarray, z_delta: Optional[np.ndarray] = None):
        self.ids = list(ids)
        self.z_rxn = np.ascontiguousarray(z_rxn, dtype=np.float32)
        self.z_delta = None if z_delta is None else np.ascontiguousarray(z_delta, dtype=np.float32)
        self._validate()
        self._rows = {reaction_id: i for i, reaction_id in enumerate(self.ids)}

    def _validate(self):
        if self.z_rxn.ndim != 2:
            raise DimensionError("z_rxn must be 2-D, got shape {}.".format(self.z_rxn.shape))
        if self.z_rxn.shape[0] != len(self.ids):
            raise DimensionError("z_rxn has {} rows for {} ids.".format(self.z_rxn.shape[0], len(self.ids)))
        if self.z_rxn.shape[1] < 1:
            raise DimensionError("Bank dimension must be positive.")
        if self.z_delta is not None and self.z_delta.shape != self.z_rxn.shape:
            raise DimensionError("z_delta shape {} differs from z_rxn shape {}.".format(
                self.z_delta.shape, self.z_rxn.shape))
        if len(set(self.ids)) != len(self.ids):
            raise DataError("Bank ids are not unique.")
        for matrix in (self.z_rxn, self.z_delta):
            if matrix is None:
                continue
            bad = ~np.isfinite(matrix).all(axis=1)
            if bad.any():
                raise NonFiniteError(int(np.flatnonzero(bad)[0]))

    def __len__(self):
        return len(self.ids)

    def __contains__(self, reaction_id):
        return reaction_id in self._rows

    @property
    def dim(self) -> int:
        return self.z_rxn.shape[1]

    @property
    def has_delta(self) -> bool:
        return self.z_delta is not None

    def row_of(self, reaction_id: str) -> int:
        try:
            return self._rows[reaction_id]
        except KeyError:
            raise UnknownReactionError(reaction_id)

    def rows_of(self, reaction_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.row_of(reaction_id) for reaction_id in reaction_ids], dtype=np.int64)

    def keys(self, key_kind: KeyKind, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """Raw (unnormalized) retrieval keys: z_rxn, or [z_rxn; z_delta]."""
        rows = slice(None) if rows is None else rows
        if key_kind == KeyKind.rxn_only:
            return self.z_rxn[rows]
        if key_kind == KeyKind.rxn_concat_delta:
            if self.z_delta is None:
                raise DataError("Key kind 'rxn+delta' needs a bank with z_delta.")
            return np.concatenate([self.z_rxn[rows], self.z_delta[rows]], axis=-1)
        raise DataError("Key kind '{}' is not built from an embedding bank.".format(key_kind.value))

    def key_dim(self, key_kind: KeyKind) -> int:
        return self.dim * (2 if key_kind == KeyKind.rxn_concat_delta else 1)

    def subset(self, reaction_ids: Sequence[str]) -> "EmbeddingBank":
        rows = self.rows_of(reaction_ids)
        return EmbeddingBank(list(reaction_ids), self.z_rxn[rows],
                             None if self.z_delta is None else self.z_delta[rows])


def write_embedding_bank(bank: EmbeddingBank, path: str):
    atomic_write(path, encode_bank(bank.ids, bank.z_rxn, bank.z_delta))
    logging.info("Wrote bank of {} x {} to '{}'.".format(len(bank), bank.dim, path))


def load_embedding_bank(path: str) -> EmbeddingBank:
    with open(path, "rb") as f:
        data = f.read()
    ids, z_rxn, z_delta, flags = decode_bank(data, path)
    if role_tag_of(flags):
        raise FormatError("'{}' is a head-probability file, not an embedding bank.".format(path))
    bank = EmbeddingBank(ids, z_rxn, z_delta)
    logging.info("Loaded bank '{}': {} rows, d={}{}.".format(path, len(bank), bank.dim,
                                                          ", with z_delta" if bank.has_delta else ""))
    return bank


def merge_banks(banks: List[EmbeddingBank]) -> EmbeddingBank:
    if len(banks) == 1:
        return banks[0]
    ids = [reaction_id for bank in banks for reaction_id in bank.ids]
    z_rxn = np.concatenate([bank.z_rxn for bank in banks])
    z_delta = None
    if all(bank.has_delta for bank in banks):
        z_delta = np.concatenate([bank.z_delta for bank in banks])
    return EmbeddingBank(ids, z_rxn, z_delta)


