#!/usr/bin/env python3
"""Small hand-built records and vocabularies shared by the suites."""
import numpy as np

from cpm.classes.model.records import ReactionRecord
from cpm.classes.model.roles import Role, Split
from cpm.classes.model.vocabulary import RoleVocabulary

CATALYSTS = ("Pd", "Ni")
SOLVENTS = ("THF", "water", "toluene")
REAGENTS = ("NaOH", "HCl", "K2CO3", "NaBH4")


def record(reaction_id, reaction="CCO>>CC=O", catalyst=None, solvent=None, reagent=None, split=Split.train,
           proxy=None) -> ReactionRecord:
    reactants, products = reaction.split(">>")
    return ReactionRecord(reaction_id, tuple(reactants.split(".")), tuple(products.split(".")),
                          catalyst, solvent, reagent, split, proxy)


def vocabs():
    return {Role.catalyst: RoleVocabulary(Role.catalyst, CATALYSTS),
            Role.solvent: RoleVocabulary(Role.solvent, SOLVENTS),
            Role.reagent: RoleVocabulary(Role.reagent, REAGENTS)}


def small_dataset():
    """Eight train and three test reactions with a mix of absent and present labels."""
    return [
        record("r01", "CCO>>CC=O", "Pd", "THF", "NaOH"),
        record("r02", "CCO>>CC=O", None, "THF", "NaOH"),
        record("r03", "CCN>>CC=N", "Pd", "water", "HCl"),
        record("r04", "CCCO>>CCC=O", None, "THF", None),
        record("r05", "c1ccccc1Br.OB(O)c1ccccc1>>c1ccc(cc1)-c1ccccc1", "Pd", "toluene", "K2CO3"),
        record("r06", "CC(=O)Cl.NCC>>CC(=O)NCC", None, None, "NaOH"),
        record("r07", "CC=O>>CCO", None, "water", "NaBH4"),
        record("r08", "CCC=O>>CCCO", "Ni", "water", "NaBH4"),
        record("t01", "CCO>>CC=O", "Pd", "THF", "HCl", Split.test),
        record("t02", "CCCC=O>>CCCCO", None, "water", "NaBH4", Split.test),
        record("t03", "c1ccccc1I.OB(O)c1ccccc1>>c1ccc(cc1)-c1ccccc1", "Pd", "toluene", None, Split.test),
    ]


def random_simplex(rng, size: int) -> np.ndarray:
    return rng.dirichlet(np.ones(size))
