#!/usr/bin/env python3
"""Index files: one sectioned container holding keys, ids, labels, vocabularies and metadata."""
import logging

import numpy as np

from .precedent import PrecedentIndex
from ..fingerprint.drfp import FingerprintParams
from ..ingest.container import SectionReader, SectionWriter
from ..model.roles import KeyKind, ROLES
from ..model.vocabulary import RoleVocabulary
from ..util.errors import FormatError

INDEX_FORMAT_VERSION = 1


def _vocab_section(role) -> str:
    return "vocab/{}".format(role.value)


def persist(index: PrecedentIndex, path: str):
    writer = SectionWriter()
    writer.write("keys", index.keys)
    writer.write("labels", index.labels)
    writer.write_json("ids", index.ids)
    for role in ROLES:
        writer.write_json(_vocab_section(role), list(index.vocabs[role].labels))
    writer.write_json("meta", {
        "format_version": INDEX_FORMAT_VERSION,
        "key_kind": index.key_kind.value,
        "dim": index.dim,
        "size": len(index),
        "fingerprint": index.fingerprint.to_dict() if index.fingerprint else None,
    })
    writer.save(path)
    logging.info("Persisted {} index of {} rows to '{}'.".format(index.key_kind.value, len(index), path))


def load(path: str, block_size=None) -> PrecedentIndex:
    reader = SectionReader(path)
    meta = reader.json("meta")
    if meta.get("format_version") != INDEX_FORMAT_VERSION:
        raise FormatError("'{}' has index format version {}, expected {}.".format(
            path, meta.get("format_version"), INDEX_FORMAT_VERSION))
    key_kind = KeyKind.parse(meta["key_kind"])
    ids = reader.json("ids")
    keys = np.array(reader["keys"]).reshape(len(ids), int(meta["dim"]))
    expected = np.uint8 if key_kind == KeyKind.drfp else np.float32
    if keys.dtype != expected:
        raise FormatError("'{}' stores {} keys for a {} index.".format(path, keys.dtype, key_kind.value))
    vocabs = {role: RoleVocabulary(role, tuple(reader.json(_vocab_section(role)))) for role in ROLES}
    fingerprint = FingerprintParams.from_dict(meta["fingerprint"]) if meta.get("fingerprint") else None
    index = PrecedentIndex(key_kind, ids, keys, np.array(reader["labels"]), vocabs, fingerprint, block_size)
    logging.info("Loaded {} index '{}': {} rows, D={}.".format(key_kind.value, path, len(index), index.dim))
    return index
