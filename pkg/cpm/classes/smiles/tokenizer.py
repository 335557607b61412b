#!/usr/bin/env python3
"""Tokenizer-level SMILES handling.  No aromaticity, valence or canonical ordering."""
import re
from collections import Counter
from typing import List, Iterable

from .token import Token, TokenKind
from ..util.errors import SmilesParseError, UsageError

TOKEN_REGEX = re.compile(
    r"(?P<bracket_atom>\[[^\[\]]*\])"
    r"|(?P<atom>Cl|Br|[BCNOPSFI]|[bcnops]|\*)"
    r"|(?P<bond>[-=#$:/\\])"
    r"|(?P<ring_closure>%\d{2}|\d)"
    r"|(?P<branch_open>\()"
    r"|(?P<branch_close>\))"
    r"|(?P<dot>\.)")
ATOM_MAP_REGEX = re.compile(r":(\d+)\]$")


def tokenize(smiles: str) -> List[Token]:
    """Splits a SMILES string into tokens whose texts concatenate back to the input.

    :raise SmilesParseError: unbalanced brackets, parentheses or ring closures, or an unexpected character."""
    tokens = []
    open_branches = []
    open_rings = {}
    position = 0
    while position < len(smiles):
        match = TOKEN_REGEX.match(smiles, position)
        if not match:
            char = smiles[position]
            if char in "[]":
                raise SmilesParseError("Unbalanced bracket", smiles, position)
            raise SmilesParseError("Unexpected character '{}'".format(char), smiles, position)

        kind = TokenKind(match.lastgroup)
        text = match.group()
        atom_map = None
        if kind == TokenKind.bracket_atom:
            map_match = ATOM_MAP_REGEX.search(text)
            atom_map = int(map_match.group(1)) if map_match else None
        elif kind == TokenKind.branch_open:
            open_branches.append(position)
        elif kind == TokenKind.branch_close:
            if not open_branches:
                raise SmilesParseError("Unbalanced parenthesis", smiles, position)
            open_branches.pop()
        elif kind == TokenKind.ring_closure:
            # %05 and 5 name the same ring bond
            ring = int(text.lstrip("%"))
            if ring in open_rings:
                del open_rings[ring]
            else:
                open_rings[ring] = position

        tokens.append(Token(kind, text, atom_map))
        position = match.end()

    if open_branches:
        raise SmilesParseError("Unbalanced parenthesis", smiles, open_branches[-1])
    if open_rings:
        raise SmilesParseError("Unclosed ring bond", smiles, min(open_rings.values()))
    return tokens


def detokenize(tokens: Iterable[Token]) -> str:
    return "".join(token.text for token in tokens)


def strip_atom_maps(smiles: str) -> str:
    """Removes ':n' atom-map suffixes from bracket atoms.  Brackets are kept."""
    return detokenize(_unmapped(token) for token in tokenize(smiles))


def _unmapped(token: Token) -> Token:
    if token.atom_map is None:
        return token
    return Token(token.kind, ATOM_MAP_REGEX.sub("]", token.text))


def normalize(smiles: str) -> str:
    return strip_atom_maps(smiles.strip())


def split_molecules(tokens: List[Token]) -> List[List[Token]]:
    """Splits a token list at dot tokens.  Empty fragments are kept so callers see them."""
    molecules = [[]]
    for token in tokens:
        if token.kind == TokenKind.dot:
            molecules.append([])
        else:
            molecules[-1].append(token)
    return molecules


def shingles(tokens: List[Token], n_min: int = 1, n_max: int = 3) -> Counter:
    """Multiset of contiguous token n-grams, n in [n_min, n_max], never crossing a dot."""
    if n_min < 1 or n_max < n_min:
        raise UsageError("Shingle window [{}, {}] is invalid.".format(n_min, n_max))
    result = Counter()
    for molecule in split_molecules(tokens):
        texts = [token.text for token in molecule]
        for n in range(n_min, min(n_max, len(texts)) + 1):
            for start in range(len(texts) - n + 1):
                result["".join(texts[start:start + n])] += 1
    return result
