#!/usr/bin/env python3
import os
import tempfile
import unittest

import numpy as np

from cpm.classes.model.distributions import RoleDistribution, check_simplex, present_only_view, rank_classes
from cpm.classes.model.records import (ReactionRecord, build_multihot, duplicate_group_count, remapped_labels,
                                       row_targets)
from cpm.classes.model.retrieval import RetrievalConfig, format_temperature, parse_temperature
from cpm.classes.model.roles import KeyKind, Role, ROLES, Split
from cpm.classes.model.vocabulary import (ABSENT, RoleVocabulary, derive_vocabularies, load_vocabulary,
                                          remap_absent)
from cpm.classes.util.configuration import Config, Section, Subsection
from cpm.classes.util.errors import DataError, FormatError, SimplexError, UsageError, VocabularyError
from tests.fixtures import record, small_dataset, vocabs


class VocabularyTests(unittest.TestCase):
    def setUp(self):
        self.vocab = RoleVocabulary(Role.catalyst, ("Pd", "Ni"))

    def test_absent_is_class_zero(self):
        self.assertEqual(remap_absent(None, self.vocab), ABSENT)
        self.assertEqual(remap_absent("", self.vocab), ABSENT)
        self.assertEqual(remap_absent("Pd", self.vocab), 1)
        self.assertEqual(remap_absent("Ni", self.vocab), 2)
        self.assertEqual(self.vocab.size_with_absent, 3)

    def test_label_for_inverts_remapping(self):
        for label in (None, "Pd", "Ni"):
            self.assertEqual(self.vocab.label_for(remap_absent(label, self.vocab)), label)
        self.assertEqual(self.vocab.display_label(0), "<absent>")
        with self.assertRaises(IndexError):
            self.vocab.label_for(3)

    def test_unknown_label(self):
        with self.assertRaises(VocabularyError) as caught:
            remap_absent("Pt", self.vocab)
        self.assertIsInstance(caught.exception, KeyError)
        self.assertIsInstance(caught.exception, DataError)
        self.assertEqual(str(caught.exception), "Label 'Pt' is not in the catalyst vocabulary.")

    def test_duplicate_and_empty_labels_are_rejected(self):
        with self.assertRaises(DataError):
            RoleVocabulary(Role.solvent, ("THF", "THF"))
        with self.assertRaises(DataError):
            RoleVocabulary(Role.solvent, ("THF", ""))

    def test_vocabulary_file_line_order_defines_classes(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "catalyst.txt")
            with open(path, "w", encoding="utf-8") as f:
                f.write("".join("cat_{}\n".format(i) for i in range(53)) + "\n\n")
            vocab = load_vocabulary(path, Role.catalyst)
        self.assertEqual(vocab.size_present, 53)
        self.assertEqual(vocab.size_with_absent, 54)
        self.assertEqual(remap_absent("cat_0", vocab), 1)
        self.assertEqual(remap_absent("cat_52", vocab), 53)

    def test_vocabulary_file_must_be_utf8(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "solvent.txt")
            with open(path, "wb") as f:
                f.write(b"THF\n\xff\xfewater\n")
            with self.assertRaises(FormatError) as caught:
                load_vocabulary(path, Role.solvent)
        self.assertEqual(caught.exception.exit_code, 3)
        self.assertIn("not valid UTF-8", str(caught.exception))

    def test_derived_vocabularies_are_sorted(self):
        derived = derive_vocabularies(small_dataset())
        self.assertEqual(derived[Role.catalyst].labels, ("Ni", "Pd"))
        self.assertEqual(derived[Role.solvent].labels, ("THF", "toluene", "water"))
        self.assertEqual(derived[Role.reagent].labels, ("HCl", "K2CO3", "NaBH4", "NaOH"))


class RecordTests(unittest.TestCase):
    def test_record_needs_both_sides(self):
        with self.assertRaises(DataError):
            ReactionRecord("r", (), ("CC",))
        with self.assertRaises(DataError):
            ReactionRecord("r", ("CC",), ())

    def test_conditions_treat_empty_as_absent(self):
        r = ReactionRecord("r", ("CC",), ("C=C",), catalyst="", solvent="THF")
        self.assertEqual(r.conditions, {Role.catalyst: None, Role.solvent: "THF", Role.reagent: None})

    def test_remapped_labels(self):
        self.assertEqual(remapped_labels(record("r", catalyst="Ni", reagent="HCl"), vocabs()),
                         {Role.catalyst: 2, Role.solvent: 0, Role.reagent: 2})

    def test_duplicates_share_the_union_of_their_labels(self):
        records = [record("a", "CC.O>>CO", reagent="NaOH"),
                   record("b", "O.CC>>CO", reagent="HCl"),
                   record("c", "CCO>>CC=O", reagent=None)]
        targets = row_targets(records, vocabs())
        self.assertEqual(targets[0][Role.reagent].valid_labels, frozenset([1, 2]))
        self.assertIs(targets[0], targets[1])
        self.assertEqual(targets[2][Role.reagent].valid_labels, frozenset([ABSENT]))
        self.assertEqual(duplicate_group_count(records), 1)

    def test_multihot_of_a_single_record(self):
        target = build_multihot([record("a", solvent="water")], vocabs())
        self.assertEqual(target[Role.solvent].valid_labels, frozenset([2]))
        self.assertEqual(target[Role.solvent].size_with_absent, 4)
        with self.assertRaises(DataError):
            build_multihot([], vocabs())


class DistributionTests(unittest.TestCase):
    def test_simplex_checks(self):
        RoleDistribution(Role.reagent, [0.25, 0.75])
        with self.assertRaises(SimplexError):
            RoleDistribution(Role.reagent, [0.5, 0.6])
        with self.assertRaises(SimplexError):
            RoleDistribution(Role.reagent, [1.5, -0.5])
        with self.assertRaises(SimplexError):
            check_simplex(np.array([np.nan, 1.0]))

    def test_ranking_breaks_ties_by_class_index(self):
        self.assertEqual(rank_classes(np.array([0.25, 0.5, 0.25])).tolist(), [1, 0, 2])
        distribution = RoleDistribution(Role.solvent, [0.25, 0.25, 0.5])
        self.assertEqual(distribution.ranked(), [(2, 0.5), (0, 0.25), (1, 0.25)])
        self.assertEqual(distribution.top(), 2)

    def test_distributions_are_immutable(self):
        distribution = RoleDistribution(Role.solvent, [0.5, 0.5])
        with self.assertRaises(ValueError):
            distribution.probs[0] = 1.0

    def test_present_only_view(self):
        self.assertEqual(present_only_view(np.array([0.5, 0.25, 0.25])).tolist(), [0.0, 0.5, 0.5])
        self.assertEqual(present_only_view(np.array([1.0, 0.0, 0.0])).tolist(), [0.0, 0.5, 0.5])
        rows = present_only_view(np.array([[0.2, 0.6, 0.2], [0.0, 0.0, 1.0]]))
        self.assertTrue(np.allclose(rows, [[0.0, 0.75, 0.25], [0.0, 0.0, 1.0]]))


class RetrievalConfigTests(unittest.TestCase):
    def tearDown(self):
        Config.clear()

    def test_temperature_parsing(self):
        self.assertIsNone(parse_temperature("uniform"))
        self.assertIsNone(parse_temperature(" Uniform "))
        self.assertEqual(parse_temperature("0.07"), 0.07)
        self.assertEqual(format_temperature(None), "uniform")
        self.assertEqual(format_temperature(0.1), "0.1")
        for bad in ("-1", "0", "hot", float("inf")):
            with self.assertRaises(UsageError):
                parse_temperature(bad)

    def test_validation(self):
        with self.assertRaises(UsageError):
            RetrievalConfig(k=0)
        with self.assertRaises(UsageError):
            RetrievalConfig(k=True)
        with self.assertRaises(UsageError):
            RetrievalConfig(alpha=1.5)
        self.assertEqual(RetrievalConfig("rxn+delta").key_kind, KeyKind.rxn_concat_delta)

    def test_defaults_from_config(self):
        Config.clear()
        self.assertEqual(RetrievalConfig.from_config(), RetrievalConfig(KeyKind.rxn_only, 10, None, 0.5))
        Config.set(Section.retrieval, Subsection.temperature, "0.05")
        self.assertEqual(RetrievalConfig.from_config().temperature, 0.05)

    def test_overrides_and_dict_form(self):
        config = RetrievalConfig().with_overrides(k=5, temperature="0.1")
        self.assertEqual(config.to_dict(), {"key": "rxn", "k": 5, "temperature": "0.1", "alpha": 0.5})
        self.assertEqual(RetrievalConfig.from_dict(config.to_dict()), config)

    def test_selection_order_puts_uniform_last(self):
        uniform = RetrievalConfig(k=5)
        tempered = RetrievalConfig(k=5, temperature=0.1)
        self.assertLess(tempered.selection_order(), uniform.selection_order())
        self.assertLess(RetrievalConfig(k=1).selection_order(), tempered.selection_order())


class RoleTests(unittest.TestCase):
    def test_parsing(self):
        self.assertEqual(Role.parse(" Reagent"), Role.reagent)
        with self.assertRaises(UsageError):
            Role.parse("ligand")
        self.assertEqual(Split.parse("val"), Split.validation)
        self.assertEqual(KeyKind.parse("rxn_concat_delta"), KeyKind.rxn_concat_delta)
        self.assertEqual(KeyKind.parse("DRFP"), KeyKind.drfp)
        with self.assertRaises(UsageError):
            KeyKind.parse("morgan")
        self.assertEqual(ROLES, (Role.catalyst, Role.solvent, Role.reagent))


if __name__ == '__main__':
    unittest.main()
