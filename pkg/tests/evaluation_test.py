#!/usr/bin/env python3
import json
import unittest

import numpy as np

from cpm.classes.evaluation.audit import ExclusionRung, OverlapKeys, overlap_audit
from cpm.classes.evaluation.bootstrap import BootstrapConfig, paired_bootstrap, resample_means
from cpm.classes.evaluation.evaluator import evaluate
from cpm.classes.evaluation.metrics import AbsentAuditRow, RoleMetrics, absent_audit, correct_at, topk_accuracy
from cpm.classes.evaluation.predictors import query_keys
from cpm.classes.evaluation.report import check_decomposition
from cpm.classes.evaluation.selection import (TargetMetric, build_grid, check_selection_hygiene,
                                              select_retrieval)
from cpm.classes.evaluation.synthetic import (absent_corpus, cluster_corpus, complementarity_corpus,
                                              duplicate_corpus, planted_gap)
from cpm.classes.index.precedent import build_index
from cpm.classes.ingest.reactions import by_id
from cpm.classes.ingest.split import deterministic_split
from cpm.classes.model.records import MultiHotTarget, row_targets
from cpm.classes.model.retrieval import RetrievalConfig
from cpm.classes.model.roles import KeyKind, Role, ROLES, Split
from cpm.classes.util.errors import DataError, DimensionError, InvariantError, SplitLeakageError, UsageError


def _target(*labels, size=4, role=Role.solvent):
    return MultiHotTarget(role, frozenset(labels), size)


class MetricTests(unittest.TestCase):
    def test_any_valid_class_counts(self):
        ranked = np.array([[2, 1, 0, 3], [3, 0, 1, 2], [0, 3, 2, 1]])
        targets = [_target(1, 2), _target(1), _target(2)]
        self.assertEqual(correct_at(ranked, targets, 1).tolist(), [True, False, False])
        self.assertEqual(correct_at(ranked, targets, 3).tolist(), [True, True, True])
        self.assertAlmostEqual(topk_accuracy(ranked, targets, 1), 1 / 3)
        with self.assertRaises(UsageError):
            correct_at(ranked, targets, 0)
        with self.assertRaises(DimensionError):
            correct_at(ranked[:2], targets, 1)

    def test_absent_split_and_masked_view(self):
        probs = np.array([[0.6, 0.3, 0.1, 0.0],
                          [0.6, 0.1, 0.3, 0.0],
                          [0.2, 0.1, 0.7, 0.0],
                          [0.5, 0.2, 0.2, 0.1]])
        targets = [_target(1), _target(0), _target(2), _target(0)]
        row = absent_audit(Role.solvent, probs, targets)
        self.assertEqual((row.rows, row.absent, row.present), (4, 2, 2))
        self.assertEqual(row.all_at1, 0.75)
        self.assertEqual(row.present_at1, 0.5)
        self.assertEqual(row.absent_at1, 1.0)
        self.assertEqual(row.present_masked_at1, 1.0)
        self.assertEqual(row.reconstructed_all_at1(), row.all_at1)

    def test_decomposition_violation_is_raised(self):
        audit = AbsentAuditRow(Role.reagent, rows=10, absent=5, all_at1=0.6, present_at1=1.0, absent_at1=0.0)
        with self.assertRaises(InvariantError):
            check_decomposition("doctored", RoleMetrics(Role.reagent, {1: 0.6, 3: 0.6, 5: 0.6}, audit))
        consistent = AbsentAuditRow(Role.reagent, rows=10, absent=5, all_at1=0.5, present_at1=1.0, absent_at1=0.0)
        check_decomposition("consistent", RoleMetrics(Role.reagent, {1: 0.5, 3: 0.5, 5: 0.5}, consistent))
        with self.assertRaises(InvariantError):
            check_decomposition("disagreeing", RoleMetrics(Role.reagent, {1: 0.4, 3: 0.5, 5: 0.5}, consistent))


class AbsentCorpusTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        corpus = absent_corpus()
        cls.corpus = corpus
        cls.report = evaluate(corpus.records, corpus.vocabs, RetrievalConfig(k=5), bank=corpus.bank,
                              bootstrap=BootstrapConfig(resamples=100))

    def test_corpus_counts(self):
        train = self.corpus.split(Split.train)
        test = self.corpus.split(Split.test)
        self.assertEqual((len(train), len(test)), (1000, 1000))
        self.assertEqual(train[0].id, "rxn00000")
        self.assertEqual(test[-1].id, "rxn01999")
        self.assertEqual(sum(1 for r in test if r.catalyst is None), 870)
        self.assertEqual(sum(1 for r in test if r.reagent is None), 300)

    def test_prior_predicts_absent_catalyst(self):
        audit = self.report.predictors["prior"][Role.catalyst].audit
        self.assertAlmostEqual(audit.all_at1, 0.87, places=12)
        self.assertEqual(audit.present_at1, 0.0)
        self.assertEqual(audit.absent_at1, 1.0)
        self.assertEqual(audit.absent, 870)
        self.assertAlmostEqual(audit.absent_share, 0.87)

    def test_prior_on_the_other_roles(self):
        solvent = self.report.predictors["prior"][Role.solvent]
        self.assertAlmostEqual(solvent.acc(1), 0.156, places=12)
        self.assertEqual(solvent.audit.absent_at1, 0.0)
        self.assertAlmostEqual(self.report.predictors["prior"][Role.reagent].acc(1), 0.3, places=12)

    def test_every_row_decomposes(self):
        for name, metrics in self.report.predictors.items():
            for role in ROLES:
                audit = metrics[role].audit
                self.assertLessEqual(abs(audit.all_at1 - audit.reconstructed_all_at1()), 1e-12, msg=name)

    def test_report_serializes(self):
        payload = json.loads(self.report.to_json())
        self.assertEqual(payload["counts"]["test"], 1000)
        self.assertIn("template_key", payload["provenance"])
        self.assertEqual(sorted(payload["predictors"]), ["drfp_knn", "knn", "prior", "template_majority"])
        self.assertIn("all@1", self.report.to_text())


class ComplementarityTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        corpus = complementarity_corpus()
        cls.retrieval = RetrievalConfig(KeyKind.rxn_only, k=10, temperature=None, alpha=0.5)
        cls.report = evaluate(corpus.records, corpus.vocabs, cls.retrieval, bank=corpus.bank, heads=corpus.heads,
                              bootstrap=BootstrapConfig(resamples=10000), threads=4)

    def test_hybrid_beats_both_components(self):
        hybrid = self.report.primary("hybrid")
        self.assertGreater(hybrid, self.report.primary("head"))
        self.assertGreater(hybrid, self.report.primary("knn"))

    def test_gain_over_the_head_is_significant(self):
        for role in ROLES:
            result = self.report.comparison(role, "head", "hybrid")
            self.assertGreater(result.delta, 0.0)
            self.assertTrue(result.excludes_zero)
            self.assertLessEqual(result.lower, result.delta)
            self.assertLessEqual(result.delta, result.upper)

    def test_gain_over_knn_is_positive(self):
        for role in ROLES:
            self.assertGreater(self.report.comparison(role, "knn", "hybrid").delta, 0.0)
        with self.assertRaises(KeyError):
            self.report.comparison(Role.reagent, "prior", "hybrid")


class BootstrapTests(unittest.TestCase):
    def test_planted_gap_coverage(self):
        covered = 0
        for trial in range(100):
            a, b = planted_gap(np.random.default_rng(trial), rows=2000)
            self.assertAlmostEqual(float(b.mean() - a.mean()), 0.01, places=12)
            result = paired_bootstrap(a, b, BootstrapConfig(resamples=400, seed=trial))
            covered += result.contains(0.01)
        self.assertGreaterEqual(covered, 93)

    def test_same_seed_same_interval_for_any_thread_count(self):
        a, b = planted_gap(np.random.default_rng(99), rows=3000)
        cfg = BootstrapConfig(resamples=1050, seed=5)
        serial = paired_bootstrap(a, b, cfg, threads=1)
        self.assertEqual(serial, paired_bootstrap(a, b, cfg, threads=4))
        self.assertEqual(serial, paired_bootstrap(a, b, cfg, threads=7))
        diff = (b - a).astype(np.float64)
        self.assertTrue(np.array_equal(resample_means(diff, cfg), resample_means(diff, cfg, threads=3)))
        self.assertFalse(np.array_equal(resample_means(diff, cfg),
                                        resample_means(diff, BootstrapConfig(resamples=1050, seed=6))))

    def test_identical_vectors_give_a_point_interval(self):
        a = np.array([1, 0, 1, 1, 0])
        result = paired_bootstrap(a, a, BootstrapConfig(resamples=200))
        self.assertEqual((result.delta, result.lower, result.upper), (0.0, 0.0, 0.0))
        self.assertFalse(result.excludes_zero)

    def test_input_errors(self):
        with self.assertRaises(DimensionError):
            paired_bootstrap([1, 0], [1, 0, 1])
        with self.assertRaises(DataError):
            paired_bootstrap([], [])
        with self.assertRaises(UsageError):
            BootstrapConfig(resamples=0)
        with self.assertRaises(UsageError):
            BootstrapConfig(confidence=1.0)


class OverlapAuditTests(unittest.TestCase):
    def setUp(self):
        corpus = duplicate_corpus()
        self.train = corpus.split(Split.train)
        self.test = corpus.split(Split.test)
        self.vocabs = corpus.vocabs
        self.bank = corpus.bank
        self.index = build_index(corpus.bank, self.train, KeyKind.rxn_only, corpus.vocabs)
        self.keys = query_keys(self.index, self.test, corpus.bank)
        self.targets = [row[Role.reagent] for row in row_targets(self.test, corpus.vocabs)]

    def test_precision_falls_along_the_ladder(self):
        rows = overlap_audit(self.index, self.test, self.keys, self.targets, by_id(self.train),
                             ExclusionRung.parse("all"), k=5)
        self.assertEqual([row.rung for row in rows], list(ExclusionRung))
        for row, expected in zip(rows, [1.0, 1.0, 0.8, 0.4, 0.0]):
            self.assertAlmostEqual(row.precision, expected, places=12, msg=row.rung.value)
            self.assertEqual((row.queries, row.skipped, row.k), (20, 0, 5))

    def test_exact_copies_never_survive_past_the_first_rung(self):
        keys = OverlapKeys(self.index, by_id(self.train))
        for query, key in zip(self.test, self.keys):
            family = query.id.split("_")[0]
            copies = {family + "_base", family + "_dup0", family + "_dup1"}
            unfiltered = self.index.search(key, 5, keys.excluded(query, ExclusionRung.none))
            self.assertTrue(copies & {n.id for n in unfiltered})
            for rung in list(ExclusionRung)[1:]:
                survivors = self.index.search(key, 5, keys.excluded(query, rung))
                self.assertFalse(copies & {n.id for n in survivors}, msg=rung.value)

    def test_rung_names(self):
        self.assertEqual(ExclusionRung.parse("same_product_string"), [ExclusionRung.same_product_string])
        with self.assertRaises(UsageError):
            ExclusionRung.parse("same_author")

    def test_misaligned_inputs(self):
        with self.assertRaises(UsageError):
            overlap_audit(self.index, self.test, self.keys[:3], self.targets, by_id(self.train))


class SelectionTests(unittest.TestCase):
    def test_metric_names(self):
        self.assertEqual(TargetMetric.parse("mean_acc@1"), TargetMetric("mean", 1))
        self.assertEqual(str(TargetMetric.parse(" Reagent_acc@3 ")), "reagent_acc@3")
        for bad in ("acc@1", "mean_acc@0", "mean_top1"):
            with self.assertRaises(UsageError):
                TargetMetric.parse(bad)

    def test_grid(self):
        grid = build_grid(["rxn", "rxn+delta"], [1, 5, 10], ["uniform", "0.1"])
        self.assertEqual(len(grid), 12)
        self.assertIsNone(grid[0].temperature)
        self.assertEqual(grid[-1].key_kind, KeyKind.rxn_concat_delta)

    def test_test_records_never_reach_selection(self):
        corpus = complementarity_corpus(train=100, test=20)
        train, test = corpus.split(Split.train), corpus.split(Split.test)
        with self.assertRaises(SplitLeakageError):
            check_selection_hygiene(train, test[:1])
        with self.assertRaises(SplitLeakageError):
            select_retrieval(build_grid(["rxn"], [1], ["uniform"]), train[:80], train[80:] + test[:1],
                             TargetMetric("mean", 1), corpus.vocabs, bank=corpus.bank)

    def test_five_neighbors_beat_one_on_noisy_clusters(self):
        corpus = cluster_corpus()
        selection_train, selection_validation = deterministic_split(corpus.split(Split.train), 0.2)
        self.assertTrue(selection_validation)
        result = select_retrieval(build_grid(["rxn"], [1, 5], ["uniform"]), selection_train, selection_validation,
                                  TargetMetric.parse("mean_acc@1"), corpus.vocabs, bank=corpus.bank, threads=4)
        self.assertEqual(result.winner.k, 5)
        self.assertEqual(len(result.table), 2)
        scores = {candidate.config.k: candidate.score for candidate in result.table}
        self.assertGreater(scores[5], scores[1])
        self.assertEqual(result.to_dict()["winner"]["k"], 5)

    def test_ties_go_to_the_smaller_k(self):
        corpus = cluster_corpus(train=300)
        selection_train, selection_validation = deterministic_split(corpus.split(Split.train), 0.2)
        # k beyond the selection-train size makes every candidate vote over the same neighbors
        big = len(selection_train) + 10
        result = select_retrieval(build_grid(["rxn"], [big + 5, big], ["uniform"]), selection_train,
                                  selection_validation, TargetMetric("mean", 1), corpus.vocabs, bank=corpus.bank)
        self.assertEqual(result.winner.k, big)


if __name__ == '__main__':
    unittest.main()
