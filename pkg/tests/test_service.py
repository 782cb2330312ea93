import re

import pytest
from fastapi.testclient import TestClient

from qimrag.corpus import load_corpus
from qimrag.providers import (
    FailingGenerator,
    ProviderSet,
    default_provider_set,
)
from qimrag.service import ServiceConfig, create_app
from qimrag.store import create_collection

LINE_GRAMMAR = re.compile(r"^### Human: .+ ### Assistant: .+$")

QUERY_OPTIONS = {"k": 7, "threshold": 0.8, "q": 16}


def make_client(tmp_path, providers=None, dimension=64, corpus_dir=None):
    config = ServiceConfig(
        cache_dir=tmp_path / "cache",
        providers=providers or default_provider_set(),
        corpus_dir=corpus_dir,
        dimension=dimension,
    )
    return TestClient(create_app(config))


def ingest_fixture_corpus(client):
    total = 0
    for doc_id, text in load_corpus().items():
        response = client.post("/ingest",
                               json={"doc_id": doc_id, "text": text})
        assert response.status_code == 200
        created = response.json()["chunks_created"]
        assert created >= 1
        total += created
    return total


class TestHealth:
    def test_fresh_service(self, tmp_path):
        client = make_client(tmp_path)
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["collection_size"] == 0
        assert all(p["mode"] == "stub" for p in body["providers"].values())

    def test_after_ingest(self, tmp_path):
        client = make_client(tmp_path)
        total = ingest_fixture_corpus(client)
        body = client.get("/health").json()
        assert body["collection_size"] == total > 0


class TestIngest:
    def test_seven_documents(self, tmp_path):
        client = make_client(tmp_path)
        total = ingest_fixture_corpus(client)
        assert total >= 7

    def test_reingest_identical_is_noop(self, tmp_path):
        client = make_client(tmp_path)
        docs = load_corpus()
        client.post("/ingest", json={"doc_id": "1", "text": docs["1"]})
        response = client.post("/ingest",
                               json={"doc_id": "1", "text": docs["1"]})
        assert response.json()["chunks_created"] == 0

    def test_reingest_changed_content_replaces(self, tmp_path):
        client = make_client(tmp_path)
        client.post("/ingest", json={"doc_id": "1", "text": "old text here"})
        response = client.post(
            "/ingest", json={"doc_id": "1", "text": "completely new text"})
        assert response.json()["chunks_created"] == 1
        assert client.get("/health").json()["collection_size"] == 1

    def test_empty_text_400(self, tmp_path):
        client = make_client(tmp_path)
        response = client.post("/ingest", json={"doc_id": "1", "text": "  "})
        assert response.status_code == 400

    def test_missing_field_400(self, tmp_path):
        client = make_client(tmp_path)
        response = client.post("/ingest", json={"doc_id": "1"})
        assert response.status_code == 400

    def test_dimension_conflict_409(self, tmp_path):
        cache = tmp_path / "cache"
        cache.mkdir()
        create_collection("main", 32, root=cache)
        client = make_client(tmp_path, dimension=64)
        response = client.post("/ingest",
                               json={"doc_id": "1", "text": "some text"})
        assert response.status_code == 409


class TestQuery:
    def test_fixture_query_returns_references(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        response = client.post("/query", json={
            "question": "how do I apply",
            "options": QUERY_OPTIONS,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["outcome"] == "ok"
        assert not body["degraded"]
        assert "how do I apply" in body["final_answer"]
        assert len(body["references"]) >= 1
        top = body["references"][0]
        assert top["doc_id"] == "6"
        for ref in body["references"]:
            assert ref["distance"] <= QUERY_OPTIONS["threshold"]
            assert ref["qim_score"] is not None
            assert abs(ref["distance"] - (1 - ref["cosine"])) < 1e-9
            assert ref["snippet"]

    def test_threshold_zero_no_relevant_content(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        response = client.post("/query", json={
            "question": "something entirely unrelated",
            "options": {"k": 3, "threshold": 0.0},
        })
        assert response.status_code == 200
        body = response.json()
        assert body["outcome"] == "no-relevant-content"
        assert body["references"] == []
        assert body["final_answer"] == ""

    def test_k_limits_references(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        response = client.post("/query", json={
            "question": "tell me about the programs and the studio",
            "options": {"k": 3, "threshold": 0.99},
        })
        assert len(response.json()["references"]) <= 3

    def test_empty_collection_404(self, tmp_path):
        client = make_client(tmp_path)
        response = client.post("/query", json={"question": "anything"})
        assert response.status_code == 404

    def test_bad_options_400(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        response = client.post("/query", json={
            "question": "x", "options": {"k": 0},
        })
        assert response.status_code == 400
        response = client.post("/query", json={"question": "   "})
        assert response.status_code == 400

    def test_provider_failure_502_with_degraded_payload(self, tmp_path):
        base = default_provider_set()
        providers = ProviderSet(
            embedder=base.embedder, finetuned=base.finetuned,
            foundational=FailingGenerator(), qa=base.qa,
        )
        client = make_client(tmp_path, providers=providers)
        ingest_fixture_corpus(client)
        response = client.post("/query", json={
            "question": "how do I apply", "options": QUERY_OPTIONS,
        })
        assert response.status_code == 502
        body = response.json()
        assert body["degraded"]
        assert body["final_answer"] == body["answer1"]
        assert body["references"]


class TestFeedback:
    def test_valid_feedback_durable(self, tmp_path):
        client = make_client(tmp_path)
        log_path = tmp_path / "cache" / "feedback.log"
        response = client.post("/feedback", json={
            "question": "how do I apply",
            "final_answer": "Apply online or in person.",
            "reference_chunk_ids": ["6:0"],
            "rating": 5,
            "comment": "helpful",
        })
        assert response.status_code == 200
        assert response.json()["id"]
        assert len(log_path.read_text().splitlines()) == 1

    def test_invalid_rating_400_log_unchanged(self, tmp_path):
        client = make_client(tmp_path)
        log_path = tmp_path / "cache" / "feedback.log"
        for rating in (0, 6):
            response = client.post("/feedback", json={
                "question": "q", "final_answer": "a",
                "reference_chunk_ids": [], "rating": rating,
            })
            assert response.status_code == 400
        assert not log_path.exists()

    def test_log_append_only(self, tmp_path):
        client = make_client(tmp_path)
        log_path = tmp_path / "cache" / "feedback.log"
        client.post("/feedback", json={
            "question": "first", "final_answer": "a",
            "reference_chunk_ids": [], "rating": 4,
        })
        before = log_path.read_bytes()
        client.post("/feedback", json={
            "question": "second", "final_answer": "b",
            "reference_chunk_ids": [], "rating": 3,
        })
        assert log_path.read_bytes().startswith(before)


class TestExportTraining:
    def test_generated_pairs_only_without_feedback(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        response = client.get("/export/training")
        assert response.status_code == 200
        lines = response.text.splitlines()
        assert lines
        for line in lines:
            assert LINE_GRAMMAR.match(line), line

    def test_rated_feedback_included(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        client.post("/feedback", json={
            "question": "What hours is the gallery open?",
            "final_answer": "Weekend afternoons.",
            "reference_chunk_ids": ["7:0"], "rating": 5,
        })
        text = client.get("/export/training", params={"min_rating": 4}).text
        assert ("### Human: What hours is the gallery open? "
                "### Assistant: Weekend afternoons.") in text

    def test_min_rating_excludes_low_rated(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        client.post("/feedback", json={
            "question": "Low rated question?",
            "final_answer": "Low rated answer.",
            "reference_chunk_ids": [], "rating": 3,
        })
        text = client.get("/export/training", params={"min_rating": 5}).text
        assert "Low rated question?" not in text

    def test_invalid_min_rating_400(self, tmp_path):
        client = make_client(tmp_path)
        assert client.get("/export/training",
                          params={"min_rating": 9}).status_code == 400

    def test_empty_collection_empty_body(self, tmp_path):
        client = make_client(tmp_path)
        response = client.get("/export/training")
        assert response.status_code == 200
        assert response.text == ""


class TestRestartDurability:
    def test_state_survives_restart(self, tmp_path):
        client = make_client(tmp_path)
        ingest_fixture_corpus(client)
        client.post("/feedback", json={
            "question": "Does state survive restarts?",
            "final_answer": "Yes, all of it.",
            "reference_chunk_ids": ["1:0"], "rating": 5,
        })
        size_before = client.get("/health").json()["collection_size"]
        del client

        reopened = make_client(tmp_path)
        assert reopened.get("/health").json()[
            "collection_size"] == size_before
        docs = load_corpus()
        response = reopened.post("/ingest",
                                 json={"doc_id": "1", "text": docs["1"]})
        assert response.json()["chunks_created"] == 0
        text = reopened.get("/export/training").text
        assert ("### Human: Does state survive restarts? "
                "### Assistant: Yes, all of it.") in text

    def test_corpus_preload(self, tmp_path):
        from qimrag.corpus import fixture_corpus_dir

        client = make_client(tmp_path, corpus_dir=fixture_corpus_dir())
        assert client.get("/health").json()["collection_size"] >= 7


class TestCors:
    # A browser page served from another origin must be able to call
    # the API, so both preflights and simple requests need CORS headers.

    def test_preflight_allows_cross_origin_post(self, tmp_path):
        client = make_client(tmp_path)
        response = client.options("/query", headers={
            "Origin": "http://localhost:3000",
            "Access-Control-Request-Method": "POST",
            "Access-Control-Request-Headers": "content-type",
        })
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"
        assert "POST" in response.headers["access-control-allow-methods"]

    def test_simple_request_carries_allow_origin(self, tmp_path):
        client = make_client(tmp_path)
        response = client.get("/health",
                              headers={"Origin": "http://localhost:3000"})
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"
