#!/usr/bin/env python3
"""Reaction dataset TSV.

Schema version 1 has a header row and eight tab-separated columns:
    id  reactants  products  catalyst  solvent  reagent  split  publication_proxy
reactants/products are dot-joined SMILES; an empty condition or proxy cell means absent."""
import csv
import logging
from collections import OrderedDict
from typing import Dict, Iterable, List

from ..model.records import ReactionRecord, duplicate_group_count
from ..model.roles import ROLES, Split
from ..util.decorators import timed
from ..util.errors import DataError, ReactionParseError, UsageError

SCHEMAS = {
    "1": ("id", "reactants", "products", "catalyst", "solvent", "reagent", "split", "publication_proxy"),
}


def _schema(schema_version) -> tuple:
    try:
        return SCHEMAS[str(schema_version)]
    except KeyError:
        raise UsageError("Unknown reaction schema version '{}'.".format(schema_version))


def _molecules(cell: str) -> tuple:
    return tuple(m for m in cell.strip().split(".") if m)


@timed("load_reactions")
def load_reactions(path: str, schema_version="1") -> List[ReactionRecord]:
    columns = _schema(schema_version)
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        try:
            records = _read_rows(reader, columns, schema_version)
        except UnicodeDecodeError as e:
            raise ReactionParseError("not valid UTF-8 ({})".format(e.reason), reader.line_num + 1)

    counts = split_counts(records)
    logging.info("Loaded {} reactions from '{}' ({}).".format(
        len(records), path, ", ".join("{} {}".format(n, split.value) for split, n in counts.items())))
    return records


def _read_rows(reader, columns: tuple, schema_version) -> List[ReactionRecord]:
    header = next(reader, None)
    if header is None:
        raise ReactionParseError("file is empty, expected a header row", 1)
    if tuple(cell.strip() for cell in header) != columns:
        raise ReactionParseError("header {} does not match schema {} columns {}".format(
            header, schema_version, list(columns)), 1)

    records = []
    seen = set()
    for line_number, row in enumerate(reader, start=2):
        if not any(cell.strip() for cell in row):
            continue
        record = _parse_row(row, columns, line_number)
        if record.id in seen:
            raise ReactionParseError("duplicate reaction id '{}'".format(record.id), line_number)
        seen.add(record.id)
        records.append(record)
    return records


def _parse_row(row: List[str], columns: tuple, line_number: int) -> ReactionRecord:
    if len(row) != len(columns):
        raise ReactionParseError("expected {} columns, found {}".format(len(columns), len(row)), line_number)
    cells = {name: cell.strip() for name, cell in zip(columns, row)}
    if not cells["id"]:
        raise ReactionParseError("empty reaction id", line_number)
    try:
        split = Split.parse(cells["split"])
    except ValueError:
        raise ReactionParseError("unknown split '{}'".format(cells["split"]), line_number)
    try:
        return ReactionRecord(
            id=cells["id"],
            reactants=_molecules(cells["reactants"]),
            products=_molecules(cells["products"]),
            catalyst=cells["catalyst"] or None,
            solvent=cells["solvent"] or None,
            reagent=cells["reagent"] or None,
            split=split,
            publication_proxy=cells["publication_proxy"] or None)
    except DataError as e:
        raise ReactionParseError(str(e), line_number)


def write_reactions(records: Iterable[ReactionRecord], path: str, schema_version="1"):
    columns = _schema(schema_version)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", quoting=csv.QUOTE_NONE, lineterminator="\n")
        writer.writerow(columns)
        for record in records:
            writer.writerow([record.id, ".".join(record.reactants), ".".join(record.products),
                             record.catalyst or "", record.solvent or "", record.reagent or "",
                             record.split.value, record.publication_proxy or ""])


def split_counts(records: Iterable[ReactionRecord]) -> "OrderedDict[Split, int]":
    counts = OrderedDict((split, 0) for split in Split)
    for record in records:
        counts[record.split] += 1
    return counts


def by_split(records: Iterable[ReactionRecord], split: Split) -> List[ReactionRecord]:
    return [record for record in records if record.split == split]


def by_id(records: Iterable[ReactionRecord]) -> Dict[str, ReactionRecord]:
    return {record.id: record for record in records}


def dataset_profile(records: Iterable[ReactionRecord]) -> dict:
    """Rows, duplicate canonical-reaction groups and absent share per role, for each non-empty split."""
    records = list(records)
    profile = {}
    for split in Split:
        rows = by_split(records, split)
        if not rows:
            continue
        profile[split.value] = {
            "rows": len(rows),
            "duplicate_groups": duplicate_group_count(rows),
            "absent": {role.value: sum(1 for record in rows if record.label(role) is None) / len(rows)
                       for role in ROLES},
        }
    return profile
