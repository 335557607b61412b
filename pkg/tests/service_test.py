#!/usr/bin/env python3
import json
import os
import tempfile
import threading
import time
import unittest
from unittest import mock

from cpm.classes.evaluation.synthetic import complementarity_corpus
from cpm.classes.fingerprint.drfp import FingerprintParams
from cpm.classes.index import store
from cpm.classes.index.precedent import build_index
from cpm.classes.ingest.reactions import by_id, write_reactions
from cpm.classes.model.retrieval import RetrievalConfig
from cpm.classes.model.roles import KeyKind, Split
from cpm.classes.recommend.baselines import priors
from cpm.classes.recommend.queries import Query, RecommendationEngine
from cpm.classes.service.handlers import handle_health, handle_recommend, parse_query
from cpm.classes.service.state import ServiceConfig, ServiceState
from cpm.classes.util.errors import UsageError
from tests.fixtures import small_dataset, vocabs
from webapp.service import create_app


def _engine(corpus):
    train = corpus.split(Split.train)
    index = build_index(corpus.bank, train, KeyKind.rxn_only, corpus.vocabs)
    return RecommendationEngine(index, priors(train, corpus.vocabs), RetrievalConfig(), corpus.bank, corpus.heads,
                                by_id(corpus.records))


class ServiceTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.corpus = complementarity_corpus(train=200, test=50)
        cls.engine = _engine(cls.corpus)

    def setUp(self):
        self.state = ServiceState(ServiceConfig("index.bin", "reactions.tsv", max_k=20), self.engine)
        self.client = create_app(self.state).test_client()

    def post(self, body):
        response = self.client.post("/v1/recommend", json=body)
        return response.status_code, json.loads(response.get_data(as_text=True))

    def test_health(self):
        response = self.client.get("/v1/health")
        self.assertEqual(response.status_code, 200)
        payload = response.get_json()
        self.assertEqual((payload["status"], payload["size"], payload["dim"]), ("ok", 200, 32))

    def test_recommend_by_id_matches_the_engine(self):
        response = self.client.post("/v1/recommend", json={"id": "rxn00210"})
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.mimetype, "application/json")
        expected = self.engine.recommend(Query(reaction_id="rxn00210")).to_json(self.engine.vocabs)
        self.assertEqual(response.get_data(as_text=True), expected)

    def test_overrides(self):
        status, payload = self.post({"id": "rxn00003", "k": 3, "t": 0.1, "alpha": 0.0, "top": 2})
        self.assertEqual(status, 200)
        self.assertEqual(payload["config"], {"key": "rxn", "k": 3, "temperature": "0.1", "alpha": 0.0})
        self.assertEqual(len(payload["neighbors"]), 3)
        self.assertNotIn("rxn00003", [n["id"] for n in payload["neighbors"]])
        self.assertTrue(all(len(ranked) == 2 for ranked in payload["roles"].values()))

    def test_vector_query(self):
        vector = self.corpus.bank.z_rxn[5].tolist()
        status, payload = self.post({"vector": vector, "k": 1})
        self.assertEqual(status, 200)
        self.assertEqual(payload["neighbors"][0]["id"], "rxn00005")
        self.assertIn("head_missing:catalyst", payload["flags"])

    def test_error_statuses(self):
        cases = [
            ({"id": "rxn99999"}, 404),
            ({"vector": [1.0, 2.0]}, 422),
            ({"id": "rxn00001", "k": 21}, 400),
            ({"id": "rxn00001", "k": 0}, 400),
            ({"id": "rxn00001", "t": "hot"}, 400),
            ({"id": "rxn00001", "alpha": 2.0}, 400),
            ({"id": "rxn00001", "colour": "red"}, 400),
            ({"id": "rxn00001", "vector": [1.0]}, 400),
            ({"smiles": "CCO>>CC=O"}, 400),
            ({"vector": []}, 400),
            ([1, 2, 3], 400),
        ]
        for body, expected in cases:
            status, payload = self.post(body)
            self.assertEqual(status, expected, msg=body)
            self.assertEqual(payload["code"], expected)
            self.assertTrue(payload["message"])

    def test_transport_errors(self):
        response = self.client.post("/v1/recommend", data='{"id": "rxn00001"}', content_type="text/plain")
        self.assertEqual(response.status_code, 415)
        response = self.client.post("/v1/recommend", data="{not json", content_type="application/json")
        self.assertEqual(response.status_code, 400)
        self.assertEqual(self.client.get("/v1/recommend").status_code, 405)
        response = self.client.get("/v2/recommend")
        self.assertEqual(response.status_code, 404)
        self.assertEqual(response.get_json()["code"], 404)

    def test_slow_requests_time_out(self):
        state = ServiceState(ServiceConfig("index.bin", "reactions.tsv", request_timeout=0.05), self.engine)
        with mock.patch.object(self.engine, "recommend", side_effect=lambda *args: time.sleep(0.5)):
            status, body = handle_recommend(state, {"id": "rxn00001"})
        self.assertEqual(status, 504)
        self.assertEqual(json.loads(body)["code"], 504)

    def test_timed_out_request_leaves_nothing_running(self):
        state = ServiceState(ServiceConfig("index.bin", "reactions.tsv", request_timeout=0.2), self.engine)
        with mock.patch.object(self.engine, "recommend", side_effect=lambda *args: time.sleep(0.3)):
            self.assertEqual(handle_recommend(state, {"id": "rxn00201"})[0], 504)
        start = time.monotonic()
        status, _ = handle_recommend(state, {"id": "rxn00202"})
        self.assertEqual(status, 200)
        self.assertLess(time.monotonic() - start, 0.2)

    def test_slow_request_does_not_block_others(self):
        recommend = self.engine.recommend
        started, release = threading.Event(), threading.Event()

        def held(query, config=None):
            if query.reaction_id == "rxn00201":
                started.set()
                release.wait(5)
            return recommend(query, config)

        results = {}

        def call(reaction_id):
            results[reaction_id] = handle_recommend(self.state, {"id": reaction_id})

        with mock.patch.object(self.engine, "recommend", side_effect=held):
            slow = threading.Thread(target=call, args=("rxn00201",))
            slow.start()
            self.assertTrue(started.wait(5))
            others = [threading.Thread(target=call, args=("rxn{:05d}".format(i),)) for i in range(210, 226)]
            for thread in others:
                thread.start()
            for thread in others:
                thread.join(5)
            self.assertEqual(self.client.get("/v1/health").status_code, 200)
            self.assertNotIn("rxn00201", results)
            release.set()
            slow.join(5)

        self.assertEqual(len(results), 17)
        for reaction_id, (status, body) in results.items():
            self.assertEqual(status, 200, msg=reaction_id)
            self.assertEqual(body, recommend(Query(reaction_id=reaction_id)).to_json(self.engine.vocabs))


class SmilesServiceTests(unittest.TestCase):
    def setUp(self):
        dataset = small_dataset()
        train = [r for r in dataset if r.split == Split.train]
        index = build_index(None, train, KeyKind.drfp, vocabs(), FingerprintParams(nbits=512))
        engine = RecommendationEngine(index, priors(train, vocabs()), RetrievalConfig(KeyKind.drfp, k=3),
                                      records=by_id(dataset))
        self.client = create_app(ServiceState(ServiceConfig("index.bin", "reactions.tsv"), engine)).test_client()

    def test_smiles_forms_agree(self):
        joined = self.client.post("/v1/recommend", json={"smiles": "CCO>>CC=O"})
        split = self.client.post("/v1/recommend", json={"reactants": ["CCO"], "products": "CC=O"})
        self.assertEqual(joined.status_code, 200)
        self.assertEqual(joined.get_data(), split.get_data())
        self.assertEqual([n["id"] for n in joined.get_json()["neighbors"]], ["r01", "r02", "r04"])

    def test_malformed_smiles(self):
        for body in ({"smiles": "CCO"}, {"smiles": "CCO>>CC=O", "products": ["C"]}, {"reactants": ["CCO"]},
                     {"reactants": [1], "products": ["C"]}):
            response = self.client.post("/v1/recommend", json=body)
            self.assertEqual(response.status_code, 400, msg=body)


class ServiceLoadingTests(unittest.TestCase):
    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self._directory.cleanup()

    def path(self, name):
        return os.path.join(self._directory.name, name)

    def test_not_loaded_yet(self):
        state = ServiceState(ServiceConfig(self.path("index.bin"), self.path("reactions.tsv")))
        status, body = handle_health(state)
        self.assertEqual((status, json.loads(body)["status"]), (503, "loading"))
        self.assertEqual(handle_recommend(state, {"id": "r01"})[0], 503)

    def test_failed_load_is_reported(self):
        state = ServiceState(ServiceConfig(self.path("missing.bin"), self.path("missing.tsv")))
        state.load()
        self.assertFalse(state.loaded)
        self.assertIsNotNone(state.load_error)
        status, body = handle_health(state)
        self.assertEqual(status, 503)
        self.assertTrue(json.loads(body)["status"].startswith("failed: "))

    def test_background_load(self):
        dataset = small_dataset()
        write_reactions(dataset, self.path("reactions.tsv"))
        train = [r for r in dataset if r.split == Split.train]
        store.persist(build_index(None, train, KeyKind.drfp, vocabs(), FingerprintParams(nbits=256)),
                      self.path("index.bin"))
        state = ServiceState(ServiceConfig(self.path("index.bin"), self.path("reactions.tsv"),
                                           retrieval=RetrievalConfig(KeyKind.drfp, k=2)))
        state.load_in_background().join(timeout=30)
        self.assertTrue(state.loaded)
        status, body = handle_recommend(state, {"id": "t01"})
        self.assertEqual(status, 200)
        self.assertEqual([n["id"] for n in json.loads(body)["neighbors"]], ["r01", "r02"])
        self.assertEqual(json.loads(handle_health(state)[1])["size"], 8)

    def test_configuration_bounds(self):
        with self.assertRaises(UsageError):
            ServiceConfig("i", "d", retrieval=RetrievalConfig(k=50), max_k=20)
        with self.assertRaises(UsageError):
            ServiceConfig("i", "d", request_timeout=0)
        with self.assertRaises(UsageError):
            parse_query({"id": 7})


if __name__ == '__main__':
    unittest.main()
