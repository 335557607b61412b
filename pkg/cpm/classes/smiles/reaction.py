#!/usr/bin/env python3
"""String identities for reactions built on normalized SMILES."""
from typing import Iterable, List, Tuple

from .tokenizer import normalize
from ..util.errors import UsageError

REACTION_ARROW = ">>"


def split_reaction_smiles(reaction_smiles: str) -> Tuple[List[str], List[str]]:
    """'A.B>>C' -> (['A', 'B'], ['C']).  Agents between single arrows are dropped."""
    parts = reaction_smiles.strip().split(">")
    if len(parts) != 3:
        raise UsageError("Reaction SMILES '{}' needs exactly one '>>' or 'a>b>c' form.".format(reaction_smiles))
    reactants, _agents, products = parts
    return _molecules(reactants), _molecules(products)


def _molecules(side: str) -> List[str]:
    return [m for m in side.split(".") if m]


def canonical_molecule_list(molecules: Iterable[str]) -> List[str]:
    """Normalized molecule strings, dot-split and sorted lexicographically."""
    normalized = []
    for molecule in molecules:
        normalized.extend(m for m in normalize(molecule).split(".") if m)
    return sorted(normalized)


def canonical_side(molecules: Iterable[str]) -> str:
    return ".".join(canonical_molecule_list(molecules))


def canonical_reaction_string(reactants: Iterable[str], products: Iterable[str]) -> str:
    return canonical_side(reactants) + REACTION_ARROW + canonical_side(products)
