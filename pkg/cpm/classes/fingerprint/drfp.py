#!/usr/bin/env python3
"""DRFP-style differential reaction fingerprints.

Token shingles stand in for circular substructures: bits are set at
fnv1a_64(shingle) mod nbits for every shingle present on exactly one side of
the reaction (set symmetric difference, presence only)."""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Set

import numpy as np

from ..ingest.container import SectionReader, SectionWriter
from ..model.records import ReactionRecord
from ..smiles.tokenizer import shingles, tokenize, strip_atom_maps
from ..util.decorators import log_progress
from ..util.configuration import Config, Section, Subsection
from ..util.errors import DataError, DimensionError, FormatError, SmilesParseError, UnknownReactionError, UsageError
from ..util.hashing import fnv1a_64

DEFAULT_NBITS = 2048
DEFAULT_N_MIN = 1
DEFAULT_N_MAX = 3


def _check_nbits(nbits: int):
    if nbits < 1 or nbits & (nbits - 1):
        raise UsageError("Fingerprint length must be a power of two, got {}.".format(nbits))


@dataclass(frozen=True)
class ReactionFingerprint:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).copy()
        if bits.ndim != 1:
            raise DimensionError("A fingerprint is a bit vector, got shape {}.".format(bits.shape))
        _check_nbits(len(bits))
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @property
    def nbits(self) -> int:
        return len(self.bits)

    @property
    def popcount(self) -> int:
        return int(self.bits.sum())

    def active(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]

    def __eq__(self, other):
        return isinstance(other, ReactionFingerprint) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(np.packbits(self.bits).tobytes())

    @staticmethod
    def from_bitstring(s: str) -> "ReactionFingerprint":
        return ReactionFingerprint(np.array([c == "1" for c in s], dtype=bool))


def side_shingles(molecules: Iterable[str], n_min: int, n_max: int) -> Set[str]:
    result = set()
    for molecule in molecules:
        result.update(shingles(tokenize(strip_atom_maps(molecule)), n_min, n_max))
    return result


def differential_shingles(reactants: Iterable[str], products: Iterable[str],
                          n_min: int = DEFAULT_N_MIN, n_max: int = DEFAULT_N_MAX) -> Set[str]:
    return side_shingles(reactants, n_min, n_max) ^ side_shingles(products, n_min, n_max)


def drfp_style(reaction: ReactionRecord, nbits: int = DEFAULT_NBITS,
               n_min: int = DEFAULT_N_MIN, n_max: int = DEFAULT_N_MAX) -> ReactionFingerprint:
    _check_nbits(nbits)
    try:
        difference = differential_shingles(reaction.reactants, reaction.products, n_min, n_max)
    except SmilesParseError as e:
        raise SmilesParseError("reaction '{}': {}".format(reaction.id, e.reason), e.smiles, e.position)
    bits = np.zeros(nbits, dtype=bool)
    for shingle in difference:
        bits[fnv1a_64(shingle) % nbits] = True
    return ReactionFingerprint(bits)


def tanimoto(a: ReactionFingerprint, b: ReactionFingerprint) -> float:
    """|a AND b| / |a OR b|, defined as 1.0 when both are empty."""
    if a.nbits != b.nbits:
        raise DimensionError("Cannot compare fingerprints of {} and {} bits.".format(a.nbits, b.nbits))
    union = int(np.count_nonzero(a.bits | b.bits))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(a.bits & b.bits)) / union


def template_key(fingerprint: ReactionFingerprint) -> int:
    """64-bit key over the active bit positions; the template-majority baseline's transformation proxy."""
    return fnv1a_64(",".join(str(i) for i in fingerprint.active()))


def fingerprint_matrix(records: Sequence[ReactionRecord], nbits: int = DEFAULT_NBITS,
                       n_min: int = DEFAULT_N_MIN, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """uint8 0/1 matrix [n x nbits], rows in record order."""
    matrix = np.zeros((len(records), nbits), dtype=np.uint8)
    for i, record in enumerate(records):
        matrix[i] = drfp_style(record, nbits, n_min, n_max).bits
        log_progress("fingerprints", i + 1, len(records))
    logging.info("Fingerprinted {} reactions ({} bits, shingles {}..{}).".format(len(records), nbits, n_min, n_max))
    return matrix


@dataclass(frozen=True)
class FingerprintParams:
    nbits: int = DEFAULT_NBITS
    n_min: int = DEFAULT_N_MIN
    n_max: int = DEFAULT_N_MAX

    def __post_init__(self):
        _check_nbits(self.nbits)
        if self.n_min < 1 or self.n_max < self.n_min:
            raise UsageError("Shingle window must satisfy 1 <= n_min <= n_max, got {}..{}.".format(
                self.n_min, self.n_max))

    def fingerprint(self, reaction: ReactionRecord) -> ReactionFingerprint:
        return drfp_style(reaction, self.nbits, self.n_min, self.n_max)

    def to_dict(self) -> dict:
        return {"nbits": self.nbits, "n_min": self.n_min, "n_max": self.n_max}

    @staticmethod
    def from_dict(d: dict) -> "FingerprintParams":
        return FingerprintParams(int(d["nbits"]), int(d["n_min"]), int(d["n_max"]))

    @staticmethod
    def from_config() -> "FingerprintParams":
        return FingerprintParams(Config.get_int(Section.fingerprint, Subsection.nbits),
                                 Config.get_int(Section.fingerprint, Subsection.n_min),
                                 Config.get_int(Section.fingerprint, Subsection.n_max))


class FingerprintBank:
    """Fingerprint bit rows (uint8 0/1) keyed by reaction id."""

    def __init__(self, ids: Sequence[str], bits: np.ndarray):
        self.ids = list(ids)
        self.bits = np.ascontiguousarray(bits, dtype=np.uint8)
        if self.bits.ndim != 2 or self.bits.shape[0] != len(self.ids):
            raise DimensionError("Fingerprint matrix shape {} does not match {} ids.".format(
                self.bits.shape, len(self.ids)))
        _check_nbits(self.bits.shape[1])
        self._rows = {reaction_id: i for i, reaction_id in enumerate(self.ids)}
        if len(self._rows) != len(self.ids):
            raise DataError("Fingerprint bank ids are not unique.")

    def __len__(self):
        return len(self.ids)

    def __contains__(self, reaction_id):
        return reaction_id in self._rows

    @property
    def nbits(self) -> int:
        return self.bits.shape[1]

    def row_of(self, reaction_id: str) -> int:
        try:
            return self._rows[reaction_id]
        except KeyError:
            raise UnknownReactionError(reaction_id)

    @staticmethod
    def from_records(records: Sequence[ReactionRecord], params: FingerprintParams) -> "FingerprintBank":
        return FingerprintBank([record.id for record in records],
                               fingerprint_matrix(records, params.nbits, params.n_min, params.n_max))


def write_fingerprint_bank(bank: FingerprintBank, path: str):
    """Bit rows are stored packed (np.packbits, ceil(nbits / 8) bytes per row) in a sectioned container."""
    writer = SectionWriter()
    writer.write_json("fingerprint_ids", bank.ids)
    writer.write_json("fingerprint_meta", {"nbits": bank.nbits})
    writer.write("fingerprint_bits", np.packbits(bank.bits.astype(bool), axis=1))
    writer.save(path)
    logging.info("Wrote {} fingerprints of {} bits to '{}'.".format(len(bank), bank.nbits, path))


def load_fingerprint_bank(path: str) -> FingerprintBank:
    reader = SectionReader(path)
    if "fingerprint_bits" not in reader:
        raise FormatError("'{}' is not a fingerprint bank.".format(path))
    ids = reader.json("fingerprint_ids")
    nbits = int(reader.json("fingerprint_meta")["nbits"])
    packed = reader["fingerprint_bits"]
    if packed.ndim != 2 or packed.shape != (len(ids), (nbits + 7) // 8):
        raise DimensionError("Fingerprint bits in '{}' have shape {}, expected ({}, {}).".format(
            path, packed.shape, len(ids), (nbits + 7) // 8))
    bits = np.unpackbits(packed, axis=1, count=nbits) if len(ids) else np.zeros((0, nbits), dtype=np.uint8)
    return FingerprintBank(ids, bits)
