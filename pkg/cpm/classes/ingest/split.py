#!/usr/bin/env python3
import logging
from typing import List, Sequence, Tuple

from ..model.records import ReactionRecord
from ..model.roles import Split
from ..util.errors import SplitLeakageError, UsageError
from ..util.hashing import fnv1a_64

BUCKETS = 10 ** 6


def in_validation(canonical: str, fraction: float) -> bool:
    return (fnv1a_64(canonical) % BUCKETS) < fraction * BUCKETS


def deterministic_split(train: Sequence[ReactionRecord], validation_fraction: float
                        ) -> Tuple[List[ReactionRecord], List[ReactionRecord]]:
    """Hashes each record's canonical reaction string into selection-train or selection-validation.

    Records sharing a canonical string always land together; input order only affects output order."""
    if not 0.0 < validation_fraction < 1.0:
        raise UsageError("Validation fraction must lie strictly between 0 and 1, got {}.".format(validation_fraction))
    selection_train, selection_validation = [], []
    for record in train:
        if record.split != Split.train:
            raise SplitLeakageError("Record '{}' from the {} split reached the selection split.".format(
                record.id, record.split.value))
        (selection_validation if in_validation(record.canonical, validation_fraction) else selection_train).append(record)
    logging.info("Selection split: {} selection-train, {} selection-validation (fraction {}).".format(
        len(selection_train), len(selection_validation), validation_fraction))
    return selection_train, selection_validation
