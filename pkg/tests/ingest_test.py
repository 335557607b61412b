#!/usr/bin/env python3
import os
import struct
import tempfile
import unittest

import numpy as np

from cpm.classes.ingest.bank import EmbeddingBank, load_embedding_bank, merge_banks, write_embedding_bank
from cpm.classes.ingest.container import SectionReader, SectionWriter, decode_bank, encode_bank
from cpm.classes.ingest.heads import HeadProbabilities, load_head_probabilities, write_head_probabilities
from cpm.classes.ingest.reactions import (by_split, dataset_profile, load_reactions, split_counts,
                                          write_reactions)
from cpm.classes.ingest.split import deterministic_split
from cpm.classes.model.roles import KeyKind, Role, Split
from cpm.classes.model.vocabulary import RoleVocabulary
from cpm.classes.util.errors import (DataError, DimensionError, FormatError, NonFiniteError, ReactionParseError,
                                     SimplexError, SplitLeakageError, UnknownReactionError, UsageError)
from tests.fixtures import record, small_dataset

HEADER = "id\treactants\tproducts\tcatalyst\tsolvent\treagent\tsplit\tpublication_proxy\n"


class TemporaryDirectoryTestCase(unittest.TestCase):
    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()
        self.directory = self._directory.name

    def tearDown(self):
        self._directory.cleanup()

    def path(self, name):
        return os.path.join(self.directory, name)

    def write_text(self, name, text):
        with open(self.path(name), "w", encoding="utf-8") as f:
            f.write(text)
        return self.path(name)


class ReactionFileTests(TemporaryDirectoryTestCase):
    def test_written_dataset_reads_back(self):
        records = small_dataset() + [record("p01", "CC>>C=C", proxy="doi:10.1000/x", split=Split.validation)]
        write_reactions(records, self.path("reactions.tsv"))
        self.assertEqual(load_reactions(self.path("reactions.tsv")), records)

    def test_blank_rows_are_skipped_and_cells_trimmed(self):
        path = self.write_text("r.tsv", HEADER + "r1\tCC.O\tCO\t\t THF \t\ttrain\t\n\t\t\t\t\t\t\t\nr2\tCC\tC=C\tPd\t\t\ttest\tpub\n")
        records = load_reactions(path)
        self.assertEqual([r.id for r in records], ["r1", "r2"])
        self.assertEqual(records[0].reactants, ("CC", "O"))
        self.assertEqual(records[0].solvent, "THF")
        self.assertIsNone(records[0].catalyst)
        self.assertEqual(records[1].publication_proxy, "pub")

    def test_malformed_rows_name_their_line(self):
        cases = {
            "wrong column count": HEADER + "r1\tCC\tCO\t\t\t\ttrain\t\nr2\tCC\tCO\ttrain\n",
            "duplicate id": HEADER + "r1\tCC\tCO\t\t\t\ttrain\t\nr1\tCC\tCO\t\t\t\ttrain\t\n",
            "unknown split": HEADER + "r1\tCC\tCO\t\t\t\ttrain\t\nr2\tCC\tCO\t\t\t\tholdout\t\n",
            "no reactants": HEADER + "r1\tCC\tCO\t\t\t\ttrain\t\nr2\t\tCO\t\t\t\ttrain\t\n",
        }
        for name, text in cases.items():
            with self.assertRaises(ReactionParseError, msg=name) as caught:
                load_reactions(self.write_text("bad.tsv", text))
            self.assertEqual(caught.exception.line_number, 3, name)
            self.assertTrue(str(caught.exception).startswith("line 3:"), name)

    def test_header_must_match_the_schema(self):
        with self.assertRaises(ReactionParseError) as caught:
            load_reactions(self.write_text("bad.tsv", "id\treactants\tproducts\n"))
        self.assertEqual(caught.exception.line_number, 1)
        with self.assertRaises(ReactionParseError):
            load_reactions(self.write_text("empty.tsv", ""))
        with self.assertRaises(UsageError):
            load_reactions(self.write_text("ok.tsv", HEADER), schema_version="2")

    def test_undecodable_bytes_are_a_parse_error(self):
        path = self.path("latin.tsv")
        with open(path, "wb") as f:
            f.write(HEADER.encode("utf-8") + b"r1\tCC\tCO\t\t\xff\xfe\t\ttrain\t\n")
        with self.assertRaises(ReactionParseError) as caught:
            load_reactions(path)
        self.assertEqual(caught.exception.exit_code, 3)
        self.assertIn("not valid UTF-8", str(caught.exception))

    def test_split_counts_and_profile(self):
        records = small_dataset()
        counts = split_counts(records)
        self.assertEqual((counts[Split.train], counts[Split.validation], counts[Split.test]), (8, 0, 3))
        self.assertEqual(len(by_split(records, Split.test)), 3)
        profile = dataset_profile(records)
        self.assertEqual(set(profile), {"train", "test"})
        self.assertEqual(profile["train"]["rows"], 8)
        self.assertEqual(profile["train"]["duplicate_groups"], 1)
        self.assertEqual(profile["train"]["absent"]["catalyst"], 4 / 8)
        self.assertEqual(profile["test"]["absent"]["reagent"], 1 / 3)


class EmbeddingBankTests(TemporaryDirectoryTestCase):
    def setUp(self):
        super().setUp()
        rng = np.random.default_rng(3)
        self.bank = EmbeddingBank(["a", "b", "c"], rng.standard_normal((3, 4)), rng.standard_normal((3, 4)))

    def test_written_bank_reads_back(self):
        write_embedding_bank(self.bank, self.path("bank.bin"))
        loaded = load_embedding_bank(self.path("bank.bin"))
        self.assertEqual(loaded.ids, ["a", "b", "c"])
        self.assertTrue(np.array_equal(loaded.z_rxn, self.bank.z_rxn))
        self.assertTrue(np.array_equal(loaded.z_delta, self.bank.z_delta))

    def test_keys(self):
        self.assertEqual(self.bank.keys(KeyKind.rxn_only).shape, (3, 4))
        concatenated = self.bank.keys(KeyKind.rxn_concat_delta, self.bank.rows_of(["c", "a"]))
        self.assertEqual(concatenated.shape, (2, 8))
        self.assertTrue(np.array_equal(concatenated[0, 4:], self.bank.z_delta[2]))
        self.assertEqual(self.bank.key_dim(KeyKind.rxn_concat_delta), 8)
        without_delta = EmbeddingBank(["a"], np.ones((1, 4)))
        with self.assertRaises(DataError):
            without_delta.keys(KeyKind.rxn_concat_delta)
        with self.assertRaises(UnknownReactionError):
            self.bank.row_of("zzz")

    def test_non_finite_rows_are_named(self):
        z = np.ones((4, 2))
        z[2, 1] = np.nan
        with self.assertRaises(NonFiniteError) as caught:
            EmbeddingBank(["a", "b", "c", "d"], z)
        self.assertEqual(caught.exception.row, 2)

    def test_shape_mismatches(self):
        with self.assertRaises(DimensionError):
            EmbeddingBank(["a", "b"], np.ones((3, 2)))
        with self.assertRaises(DimensionError):
            EmbeddingBank(["a"], np.ones((1, 2)), np.ones((1, 3)))
        with self.assertRaises(DataError):
            EmbeddingBank(["a", "a"], np.ones((2, 2)))

    def test_subset_and_merge(self):
        subset = self.bank.subset(["c", "a"])
        self.assertTrue(np.array_equal(subset.z_rxn[0], self.bank.z_rxn[2]))
        merged = merge_banks([subset, self.bank.subset(["b"])])
        self.assertEqual(merged.ids, ["c", "a", "b"])
        self.assertTrue(merged.has_delta)

    def test_hand_built_file_decodes(self):
        rows = np.array([[1.0, 2.0, 3.0], [-0.5, 0.25, 8.0]], dtype="<f4")
        data = b"HIRESEMB" + struct.pack("<IIIB", 1, 2, 3, 0) + rows.tobytes()
        for reaction_id in ("rxn1", "réaction2"):
            encoded = reaction_id.encode("utf-8")
            data += struct.pack("<I", len(encoded)) + encoded
        ids, z_rxn, z_delta, flags = decode_bank(data)
        self.assertEqual(ids, ["rxn1", "réaction2"])
        self.assertTrue(np.array_equal(z_rxn, rows))
        self.assertIsNone(z_delta)
        self.assertEqual(flags, 0)
        self.assertEqual(encode_bank(ids, rows), data)

        with open(self.path("hand.bin"), "wb") as f:
            f.write(data)
        self.assertEqual(load_embedding_bank(self.path("hand.bin")).ids, ["rxn1", "réaction2"])

    def test_with_delta_the_layout_is_header_rows_delta_ids(self):
        data = encode_bank(self.bank.ids, self.bank.z_rxn, self.bank.z_delta)
        self.assertEqual(data[:8], b"HIRESEMB")
        self.assertEqual(struct.unpack_from("<IIIB", data, 8), (1, 3, 4, 1))
        z_delta = np.frombuffer(data, dtype="<f4", count=12, offset=21 + 48).reshape(3, 4)
        self.assertTrue(np.array_equal(z_delta, self.bank.z_delta.astype(np.float32)))
        self.assertEqual(len(data), 21 + 96 + 3 * (4 + 1))

    def test_corruption_is_detected(self):
        data = bytearray(encode_bank(self.bank.ids, self.bank.z_rxn, self.bank.z_delta))
        ids, z_rxn, z_delta, _ = decode_bank(bytes(data))
        self.assertEqual(ids, self.bank.ids)

        with self.assertRaises(DimensionError):
            decode_bank(bytes(data[:29]))
        with self.assertRaises(DimensionError):
            decode_bank(bytes(data[:-1]))
        with self.assertRaises(DimensionError):
            decode_bank(bytes(data) + b"\x00")

        unknown_flag = bytearray(data)
        unknown_flag[20] |= 0x02
        with self.assertRaises(FormatError):
            decode_bank(bytes(unknown_flag))

        wrong_magic = b"NOTABANK" + bytes(data[8:])
        with self.assertRaises(FormatError):
            decode_bank(wrong_magic)

    def test_ids_must_be_utf8(self):
        data = encode_bank(["ab"], np.ones((1, 2), dtype=np.float32))
        with self.assertRaises(FormatError):
            decode_bank(data[:-2] + b"\xff\xfe")

    def test_head_file_is_not_an_embedding_bank(self):
        write_head_probabilities(self.path("heads.bin"), Role.solvent, ["a"], np.array([[0.5, 0.5]]))
        with self.assertRaises(FormatError):
            load_embedding_bank(self.path("heads.bin"))


class SectionContainerTests(TemporaryDirectoryTestCase):
    def test_sections_read_back(self):
        writer = SectionWriter()
        writer.write("floats", np.arange(6, dtype=np.float32).reshape(2, 3))
        writer.write("labels", np.array([[1, 2, 3]], dtype=np.int32))
        writer.write("bits", np.array([0, 1, 1], dtype=np.uint8))
        writer.write_json("meta", {"dim": 3})
        writer.save(self.path("c.bin"))

        reader = SectionReader(self.path("c.bin"))
        self.assertEqual(sorted(reader.names()), ["bits", "floats", "labels", "meta"])
        self.assertEqual(reader["floats"].dtype, np.float32)
        self.assertTrue(np.array_equal(reader["floats"], np.arange(6).reshape(2, 3)))
        self.assertEqual(reader["labels"].tolist(), [[1, 2, 3]])
        self.assertEqual(reader.json("meta"), {"dim": 3})
        with self.assertRaises(FormatError):
            reader["missing"]

    def test_sections_are_aligned(self):
        writer = SectionWriter()
        writer.write("a", np.zeros(3, dtype=np.uint8))
        writer.write("b", np.zeros(5, dtype=np.float64))
        reader = SectionReader.from_bytes(writer.to_bytes())
        for name in ("a", "b"):
            self.assertEqual(reader._table[name][2] % 64, 0)

    def test_checksum_and_magic(self):
        writer = SectionWriter()
        writer.write("a", np.arange(100, dtype=np.float64))
        data = bytearray(writer.to_bytes())
        data[200] ^= 0x01
        with self.assertRaises(FormatError):
            SectionReader.from_bytes(bytes(data))
        with self.assertRaises(FormatError):
            SectionReader.from_bytes(b"HIRESEMB" + bytes(data[8:]))


class HeadProbabilityTests(TemporaryDirectoryTestCase):
    def test_role_travels_with_the_file(self):
        probs = np.array([[0.1, 0.9], [0.5, 0.5]])
        write_head_probabilities(self.path("solvent.bin"), Role.solvent, ["a", "b"], probs)
        heads = load_head_probabilities([self.path("solvent.bin")])
        self.assertEqual(heads.roles, [Role.solvent])
        self.assertTrue(np.allclose(heads.get(Role.solvent, "a"), [0.1, 0.9]))
        self.assertAlmostEqual(float(heads.get(Role.solvent, "a").sum()), 1.0, places=15)
        self.assertIsNone(heads.get(Role.reagent, "a"))
        self.assertIsNone(heads.get(Role.solvent, "zzz"))

    def test_rows_off_the_simplex_are_rejected(self):
        with self.assertRaises(SimplexError):
            HeadProbabilities({Role.reagent: (["a"], np.array([[0.5, 0.6]]))})
        with self.assertRaises(NonFiniteError):
            HeadProbabilities({Role.reagent: (["a"], np.array([[np.inf, 0.0]]))})

    def test_vocabulary_and_id_coverage(self):
        heads = HeadProbabilities({Role.catalyst: (["a"], np.array([[0.2, 0.8]]))})
        with self.assertRaises(DimensionError):
            heads.check_vocabularies({Role.catalyst: RoleVocabulary(Role.catalyst, ("Pd", "Ni"))})
        with self.assertRaises(DataError):
            heads.matrix(Role.catalyst, ["a", "b"])

    def test_file_without_role_tag(self):
        with open(self.path("untagged.bin"), "wb") as f:
            f.write(encode_bank(["a"], np.array([[0.5, 0.5]], dtype=np.float32)))
        with self.assertRaises(FormatError):
            load_head_probabilities([self.path("untagged.bin")])


class DeterministicSplitTests(unittest.TestCase):
    def setUp(self):
        self.train = [record("r{:03d}".format(i), "{}>>{}".format("C" * (i + 1), "C" * (i + 1) + "O"))
                      for i in range(200)]
        self.train += [record("d{:03d}".format(i), "{}>>{}".format("C" * (i + 1), "C" * (i + 1) + "O"))
                       for i in range(50)]

    def test_duplicates_land_together(self):
        selection_train, selection_validation = deterministic_split(self.train, 0.3)
        self.assertEqual(len(selection_train) + len(selection_validation), 250)
        validation_ids = {r.id for r in selection_validation}
        for i in range(50):
            self.assertEqual("r{:03d}".format(i) in validation_ids, "d{:03d}".format(i) in validation_ids)
        self.assertTrue(0 < len(selection_validation) < 250)

    def test_input_order_only_affects_output_order(self):
        forward = deterministic_split(self.train, 0.3)
        backward = deterministic_split(list(reversed(self.train)), 0.3)
        self.assertEqual({r.id for r in forward[1]}, {r.id for r in backward[1]})

    def test_guards(self):
        for fraction in (0.0, 1.0, -0.1):
            with self.assertRaises(UsageError):
                deterministic_split(self.train, fraction)
        with self.assertRaises(SplitLeakageError):
            deterministic_split(self.train + [record("t", split=Split.test)], 0.3)


if __name__ == '__main__':
    unittest.main()
