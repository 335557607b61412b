#!/usr/bin/env python3
from enum import Enum, unique
from typing import NamedTuple, Optional


@unique
class TokenKind(str, Enum):
    atom = "atom"
    bracket_atom = "bracket_atom"
    bond = "bond"
    ring_closure = "ring_closure"
    branch_open = "branch_open"
    branch_close = "branch_close"
    dot = "dot"


class Token(NamedTuple):
    kind: TokenKind
    text: str
    atom_map: Optional[int] = None

    def __repr__(self):
        if self.atom_map is None:
            return "Token({}, '{}')".format(self.kind.value, self.text)
        return "Token({}, '{}', map={})".format(self.kind.value, self.text, self.atom_map)
