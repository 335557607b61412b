#!/usr/bin/env python3
from enum import Enum, unique

from ..util.errors import UsageError


@unique
class Role(str, Enum):
    """Condition slots predicted per reaction.  Secondary slots (solvent2, ...) are not modeled."""
    catalyst = "catalyst"
    solvent = "solvent"
    reagent = "reagent"

    @staticmethod
    def parse(s: str) -> "Role":
        try:
            return Role(s.strip().lower())
        except ValueError:
            raise UsageError("Unknown role '{}'; expected one of {}.".format(s, ", ".join(r.value for r in Role)))


ROLES = (Role.catalyst, Role.solvent, Role.reagent)


@unique
class Split(str, Enum):
    train = "train"
    validation = "validation"
    test = "test"

    @staticmethod
    def parse(s: str) -> "Split":
        aliases = {"val": Split.validation, "valid": Split.validation, "dev": Split.validation}
        s = s.strip().lower()
        if s in aliases:
            return aliases[s]
        return Split(s)


@unique
class KeyKind(str, Enum):
    """Which vectors form the retrieval key of a precedent."""
    rxn_only = "rxn"
    rxn_concat_delta = "rxn+delta"
    drfp = "drfp"

    @staticmethod
    def parse(s: str) -> "KeyKind":
        aliases = {"rxn_only": KeyKind.rxn_only, "rxn_concat_delta": KeyKind.rxn_concat_delta,
                   "rxn_delta": KeyKind.rxn_concat_delta}
        s = s.strip().lower()
        if s in aliases:
            return aliases[s]
        try:
            return KeyKind(s)
        except ValueError:
            raise UsageError("Unknown key kind '{}'; expected rxn, rxn+delta or drfp.".format(s))

    @property
    def order(self) -> int:
        return list(KeyKind).index(self)
