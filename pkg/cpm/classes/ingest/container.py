#!/usr/bin/env python3
"""Binary artifact formats.

Flat bank (embeddings, head probabilities), all little-endian:

    magic    8 bytes  b"HIRESEMB"
    version  u32
    n        u32      rows
    d        u32      columns
    flags    u8       bit 0: z_delta follows z_rxn
                      bits 4-5: role tag (0 none, 1 catalyst, 2 solvent, 3 reagent)
    payload           float32 row-major z_rxn [n x d], then z_delta [n x d] when flagged
    ids               n x (u32 byte length + UTF-8 bytes)

Sectioned container (index files, fingerprint banks, kernel weights):

    magic    8 bytes  b"CPMSECT1"
    version  u32
    table    u64      offset of the section table
    sections          raw arrays, each 64-byte aligned
    table             u32 count, then per section: u16 name length, name, u8 dtype code,
                      u8 ndim, ndim x u32 dims, u64 offset, u64 byte length
    crc32    u32      over every preceding byte
"""
import json
import os
import struct
import zlib
from typing import Dict, Optional, Tuple

import numpy as np

from ..util.errors import DimensionError, FormatError

BANK_MAGIC = b"HIRESEMB"
BANK_VERSION = 1
SECTION_MAGIC = b"CPMSECT1"
SECTION_VERSION = 1

FLAG_DELTA = 0x01
ROLE_SHIFT = 4
ROLE_MASK = 0x30

_BANK_HEADER = struct.Struct("<8sIIIB")
_SECTION_HEADER = struct.Struct("<8sIQ")
_ALIGNMENT = 64

_DTYPES = {
    "f": np.dtype("<f4"),
    "d": np.dtype("<f8"),
    "i": np.dtype("<i4"),
    "q": np.dtype("<i8"),
    "B": np.dtype("u1"),
}


def _encode_dtype(dtype) -> str:
    dtype = np.dtype(dtype)
    for code, known in _DTYPES.items():
        if (dtype.kind, dtype.itemsize) == (known.kind, known.itemsize):
            return code
    raise ValueError("unsupported tensor data type {}".format(dtype))


def atomic_write(path: str, data: bytes):
    """Writes to a sibling temporary file, then renames over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    temporary = path + ".tmp"
    with open(temporary, "wb") as f:
        f.write(data)
    os.replace(temporary, path)


def _with_checksum(body: bytes) -> bytes:
    return body + struct.pack("<I", zlib.crc32(body) & 0xffffffff)


def _verify_checksum(data: bytes, path: str) -> bytes:
    if len(data) < 4:
        raise FormatError("'{}' is too short to hold a checksum.".format(path))
    body, (stored,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) & 0xffffffff != stored:
        raise FormatError("Checksum mismatch in '{}'.".format(path))
    return body


# Flat bank


def encode_bank(ids, z_rxn: np.ndarray, z_delta: Optional[np.ndarray] = None, role_tag: int = 0) -> bytes:
    n = len(ids)
    if z_rxn.ndim != 2 or z_rxn.shape[0] != n:
        raise DimensionError("Bank matrix shape {} does not match {} ids.".format(z_rxn.shape, n))
    d = z_rxn.shape[1]
    flags = (role_tag << ROLE_SHIFT) & ROLE_MASK
    parts = [np.ascontiguousarray(z_rxn, dtype="<f4").tobytes()]
    if z_delta is not None:
        if z_delta.shape != z_rxn.shape:
            raise DimensionError("z_delta shape {} differs from z_rxn shape {}.".format(z_delta.shape, z_rxn.shape))
        flags |= FLAG_DELTA
        parts.append(np.ascontiguousarray(z_delta, dtype="<f4").tobytes())
    for reaction_id in ids:
        encoded = reaction_id.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    return _BANK_HEADER.pack(BANK_MAGIC, BANK_VERSION, n, d, flags) + b"".join(parts)


def decode_bank(data: bytes, path: str = "<bytes>"):
    """Returns (ids, z_rxn, z_delta or None, flags)."""
    if len(data) < _BANK_HEADER.size:
        raise FormatError("'{}' is too short to be a bank.".format(path))
    magic, version, n, d, flags = _BANK_HEADER.unpack_from(data, 0)
    if magic != BANK_MAGIC:
        raise FormatError("'{}' is not a bank file (bad magic {!r}).".format(path, magic))
    if version != BANK_VERSION:
        raise FormatError("'{}' has unsupported bank version {}.".format(path, version))
    if flags & ~(FLAG_DELTA | ROLE_MASK):
        raise FormatError("'{}' sets unknown bank flags 0x{:02x}.".format(path, flags))

    offset = _BANK_HEADER.size
    matrices = 2 if flags & FLAG_DELTA else 1
    payload_bytes = 4 * n * d * matrices
    if len(data) < offset + payload_bytes:
        raise DimensionError("'{}' declares {} x {} but the payload is truncated ({} bytes, need {}).".format(
            path, n, d, len(data) - offset, payload_bytes))

    z_rxn = np.frombuffer(data, dtype="<f4", count=n * d, offset=offset).reshape(n, d).copy()
    z_delta = None
    if flags & FLAG_DELTA:
        z_delta = np.frombuffer(data, dtype="<f4", count=n * d, offset=offset + 4 * n * d).reshape(n, d).copy()
    offset += payload_bytes

    ids = []
    for row in range(n):
        if offset + 4 > len(data):
            raise DimensionError("'{}' is truncated inside the id table.".format(path))
        (length,) = struct.unpack_from("<I", data, offset)
        offset += 4
        if offset + length > len(data):
            raise DimensionError("'{}' is truncated inside the id table.".format(path))
        try:
            ids.append(data[offset:offset + length].decode("utf-8"))
        except UnicodeDecodeError as e:
            raise FormatError("Id {} in '{}' is not valid UTF-8: {}".format(row, path, e))
        offset += length
    if offset != len(data):
        raise DimensionError("'{}' has {} unexpected trailing bytes.".format(path, len(data) - offset))
    return ids, z_rxn, z_delta, flags


def role_tag_of(flags: int) -> int:
    return (flags & ROLE_MASK) >> ROLE_SHIFT


# Sectioned container


class SectionWriter(object):
    """Collects named arrays and writes them as one sectioned container."""

    def __init__(self):
        self._sections = []

    def write(self, name: str, array: np.ndarray):
        array = np.ascontiguousarray(array)
        code = _encode_dtype(array.dtype)
        self._sections.append((name, code, array.shape, array.astype(_DTYPES[code], copy=False).tobytes()))

    def write_text(self, name: str, text: str):
        self.write(name, np.frombuffer(text.encode("utf-8"), dtype=np.uint8))

    def write_json(self, name: str, obj):
        self.write_text(name, json.dumps(obj, sort_keys=True))

    def to_bytes(self) -> bytes:
        body = bytearray(_SECTION_HEADER.pack(SECTION_MAGIC, SECTION_VERSION, 0))
        table = []
        for name, code, shape, payload in self._sections:
            body.extend(b"\x00" * (-len(body) % _ALIGNMENT))
            table.append((name, code, shape, len(body), len(payload)))
            body.extend(payload)
        body.extend(b"\x00" * (-len(body) % _ALIGNMENT))
        table_offset = len(body)
        body.extend(struct.pack("<I", len(table)))
        for name, code, shape, offset, length in table:
            encoded = name.encode("utf-8")
            body.extend(struct.pack("<H", len(encoded)))
            body.extend(encoded)
            body.extend(struct.pack("<cB", code.encode("ascii"), len(shape)))
            body.extend(struct.pack("<{}I".format(len(shape)), *shape))
            body.extend(struct.pack("<QQ", offset, length))
        struct.pack_into("<Q", body, 12, table_offset)
        return _with_checksum(bytes(body))

    def save(self, path: str):
        atomic_write(path, self.to_bytes())


class SectionReader(object):
    """Reads a sectioned container fully into memory; arrays are returned as read-only views."""

    def __init__(self, path: str):
        self.path = path
        with open(path, "rb") as f:
            data = f.read()
        self._read(data)

    @classmethod
    def from_bytes(cls, data: bytes, path: str = "<bytes>") -> "SectionReader":
        reader = cls.__new__(cls)
        reader.path = path
        reader._read(data)
        return reader

    def _read(self, data: bytes):
        if len(data) < _SECTION_HEADER.size + 4:
            raise FormatError("'{}' is too short to be a sectioned container.".format(self.path))
        magic, version, table_offset = _SECTION_HEADER.unpack_from(data, 0)
        if magic != SECTION_MAGIC:
            raise FormatError("'{}' is not a sectioned container (bad magic {!r}).".format(self.path, magic))
        if version != SECTION_VERSION:
            raise FormatError("'{}' has unsupported container version {}.".format(self.path, version))
        body = _verify_checksum(data, self.path)
        self._data = body
        self._table: Dict[str, Tuple[str, tuple, int, int]] = {}
        try:
            self._read_table(body, table_offset)
        except (struct.error, UnicodeDecodeError, KeyError) as e:
            raise FormatError("Corrupted section table in '{}': {}".format(self.path, e))

    def _read_table(self, body: bytes, offset: int):
        if offset > len(body) - 4:
            raise FormatError("Section table offset {} lies outside '{}'.".format(offset, self.path))
        (count,) = struct.unpack_from("<I", body, offset)
        offset += 4
        for _ in range(count):
            (name_length,) = struct.unpack_from("<H", body, offset)
            offset += 2
            name = body[offset:offset + name_length].decode("utf-8")
            offset += name_length
            code, ndim = struct.unpack_from("<cB", body, offset)
            offset += 2
            shape = struct.unpack_from("<{}I".format(ndim), body, offset)
            offset += 4 * ndim
            data_offset, length = struct.unpack_from("<QQ", body, offset)
            offset += 16
            dtype = _DTYPES[code.decode("ascii")]
            if length != int(np.prod(shape, dtype=np.int64)) * dtype.itemsize or data_offset + length > len(body):
                raise FormatError("Section '{}' in '{}' has an inconsistent size.".format(name, self.path))
            self._table[name] = (code.decode("ascii"), tuple(shape), data_offset, length)
        if offset != len(body):
            raise FormatError("Section table in '{}' has {} unexpected trailing bytes.".format(
                self.path, len(body) - offset))

    def __len__(self):
        return len(self._table)

    def __contains__(self, name):
        return name in self._table

    def names(self):
        return list(self._table)

    def __getitem__(self, name) -> np.ndarray:
        if name not in self._table:
            raise FormatError("Section '{}' is missing from '{}'.".format(name, self.path))
        code, shape, offset, length = self._table[name]
        count = length // _DTYPES[code].itemsize
        return np.frombuffer(self._data, dtype=_DTYPES[code], count=count, offset=offset).reshape(shape)

    def text(self, name) -> str:
        return self[name].tobytes().decode("utf-8")

    def json(self, name):
        return json.loads(self.text(name))
