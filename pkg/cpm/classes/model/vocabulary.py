#!/usr/bin/env python3
"""Role vocabularies and the absent-class label protocol.

Class 0 is reserved for "no label recorded".  A present label at file line i
(0-based) is class i + 1, so a 53-label catalyst file yields 54 classes."""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

from .roles import Role, ROLES
from ..util.errors import DataError, FormatError, VocabularyError

ABSENT = 0


@dataclass(frozen=True)
class RoleVocabulary:
    role: Role
    labels: Tuple[str, ...]
    _positions: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        positions = {}
        for i, label in enumerate(self.labels):
            if not label:
                raise DataError("Empty label at position {} of the {} vocabulary.".format(i, self.role.value))
            if label in positions:
                raise DataError("Duplicate label '{}' in the {} vocabulary.".format(label, self.role.value))
            positions[label] = i
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "_positions", positions)

    @property
    def size_present(self) -> int:
        return len(self.labels)

    @property
    def size_with_absent(self) -> int:
        return len(self.labels) + 1

    def __contains__(self, label):
        return label in self._positions

    def label_for(self, index: int) -> Optional[str]:
        """Inverse of remap_absent.  Class 0 maps back to None."""
        if not 0 <= index < self.size_with_absent:
            raise IndexError("Class {} is outside the {} vocabulary of {} classes.".format(
                index, self.role.value, self.size_with_absent))
        return None if index == ABSENT else self.labels[index - 1]

    def display_label(self, index: int) -> str:
        label = self.label_for(index)
        return "<absent>" if label is None else label


def remap_absent(raw_label: Optional[str], vocab: RoleVocabulary) -> int:
    """Absent -> 0; the label at vocabulary position i -> i + 1."""
    if raw_label is None or raw_label == "":
        return ABSENT
    try:
        return vocab._positions[raw_label] + 1
    except KeyError:
        raise VocabularyError(vocab.role.value, raw_label)


def load_vocabulary(path: str, role: Role) -> RoleVocabulary:
    """One label per line, UTF-8; line order defines class order.  Blank trailing lines are ignored."""
    try:
        with open(path, encoding="utf-8") as f:
            lines = [line.rstrip("\r\n") for line in f]
    except UnicodeDecodeError as e:
        raise FormatError("Vocabulary '{}' is not valid UTF-8: {}".format(path, e.reason))
    while lines and not lines[-1]:
        lines.pop()
    vocab = RoleVocabulary(role, tuple(lines))
    logging.debug("Loaded {} vocabulary: {} labels ({} classes with absent).".format(
        role.value, vocab.size_present, vocab.size_with_absent))
    return vocab


def write_vocabulary(vocab: RoleVocabulary, path: str):
    with open(path, "w", encoding="utf-8") as f:
        for label in vocab.labels:
            f.write(label + "\n")


def vocabulary_path(directory: str, role: Role) -> str:
    return os.path.join(directory, "{}.txt".format(role.value))


def load_vocabularies(directory: str) -> Dict[Role, RoleVocabulary]:
    return {role: load_vocabulary(vocabulary_path(directory, role), role) for role in ROLES}


def write_vocabularies(vocabs: Dict[Role, RoleVocabulary], directory: str):
    os.makedirs(directory, exist_ok=True)
    for role, vocab in vocabs.items():
        write_vocabulary(vocab, vocabulary_path(directory, role))


def derive_vocabularies(records: Iterable) -> Dict[Role, RoleVocabulary]:
    """Sorted set of labels seen per role.  Used when no vocabulary files are supplied."""
    seen = {role: set() for role in ROLES}
    for record in records:
        for role in ROLES:
            label = record.label(role)
            if label:
                seen[role].add(label)
    return {role: RoleVocabulary(role, tuple(sorted(seen[role]))) for role in ROLES}
