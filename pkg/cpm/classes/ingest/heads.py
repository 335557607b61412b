#!/usr/bin/env python3
"""Learned-head probabilities, ingested as data: one bank file per role, role tag in the flags byte."""
import logging
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from .container import atomic_write, decode_bank, encode_bank, role_tag_of
from ..model.distributions import check_simplex
from ..model.roles import Role, ROLES
from ..model.vocabulary import RoleVocabulary
from ..util.errors import DataError, DimensionError, FormatError, NonFiniteError

HEAD_TOLERANCE = 1e-6


def role_tag(role: Role) -> int:
    return ROLES.index(role) + 1


def role_from_tag(tag: int) -> Role:
    if not 1 <= tag <= len(ROLES):
        raise FormatError("Head-probability file carries no valid role tag ({}).".format(tag))
    return ROLES[tag - 1]


class HeadProbabilities:
    """Per-role matrices [n x size_with_absent] keyed by reaction id.  Roles may be missing."""

    def __init__(self, matrices: Dict[Role, Sequence]):
        self._ids = {}
        self._probs = {}
        self._rows = {}
        for role, (ids, probs) in matrices.items():
            self.add(role, ids, probs)

    def add(self, role: Role, ids: Sequence[str], probs: np.ndarray):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != len(ids):
            raise DimensionError("{} head matrix shape {} does not match {} ids.".format(
                role.value, probs.shape, len(ids)))
        bad = ~np.isfinite(probs).all(axis=1)
        if bad.any():
            raise NonFiniteError(int(np.flatnonzero(bad)[0]), "{} head".format(role.value))
        # rows are renormalized exactly after the tolerance check so fused outputs stay on the simplex
        check_simplex(probs, tolerance=HEAD_TOLERANCE, what="{} head probabilities".format(role.value))
        probs = probs / probs.sum(axis=1, keepdims=True)
        probs.setflags(write=False)
        self._ids[role] = list(ids)
        self._probs[role] = probs
        self._rows[role] = {reaction_id: i for i, reaction_id in enumerate(ids)}

    @property
    def roles(self):
        return [role for role in ROLES if role in self._probs]

    def has(self, role: Role, reaction_id: str) -> bool:
        return role in self._rows and reaction_id in self._rows[role]

    def get(self, role: Role, reaction_id: str) -> Optional[np.ndarray]:
        if not self.has(role, reaction_id):
            return None
        return self._probs[role][self._rows[role][reaction_id]]

    def matrix(self, role: Role, reaction_ids: Sequence[str]) -> np.ndarray:
        rows = self._rows[role]
        missing = [reaction_id for reaction_id in reaction_ids if reaction_id not in rows]
        if missing:
            raise DataError("{} head probabilities are missing for {} ids (first: '{}').".format(
                role.value, len(missing), missing[0]))
        return self._probs[role][[rows[reaction_id] for reaction_id in reaction_ids]]

    def check_vocabularies(self, vocabs: Dict[Role, RoleVocabulary]):
        for role, probs in self._probs.items():
            if probs.shape[1] != vocabs[role].size_with_absent:
                raise DimensionError("{} head probabilities have {} classes; the vocabulary has {}.".format(
                    role.value, probs.shape[1], vocabs[role].size_with_absent))


def write_head_probabilities(path: str, role: Role, ids: Sequence[str], probs: np.ndarray):
    atomic_write(path, encode_bank(list(ids), np.asarray(probs, dtype=np.float32), role_tag=role_tag(role)))


def load_head_probabilities(paths: Iterable[str]) -> HeadProbabilities:
    heads = HeadProbabilities({})
    for path in paths:
        with open(path, "rb") as f:
            ids, probs, _, flags = decode_bank(f.read(), path)
        role = role_from_tag(role_tag_of(flags))
        heads.add(role, ids, probs)
        logging.info("Loaded {} head probabilities for {} reactions from '{}'.".format(role.value, len(ids), path))
    return heads
