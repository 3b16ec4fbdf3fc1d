import pytest
from fastapi.testclient import TestClient

from evirank.config import EngineConfig
from evirank.errors import KnowledgeBaseUnavailable
from evirank.pipeline import SearchPipeline
from evirank.providers import ProviderSet
from evirank.service import create_app

FIVE_G = {"query": "can 5g antennas cause covid 19", "include_breakdown": True}


@pytest.fixture()
def client(fixture_index, providers):
    config = EngineConfig(articles_per_query=5)
    pipeline = SearchPipeline(fixture_index, providers, config)
    return TestClient(create_app(pipeline, config))


class TestSearchEndpoint:
    def test_fixture_query_returns_results_and_gentext(self, client):
        response = client.post("/api/search", json=FIVE_G)
        assert response.status_code == 200
        body = response.json()
        assert len(body["results"]) >= 1
        assert body["gentext"] is not None
        assert len(body["gentext"]["sentences"]) >= 1
        for sentence in body["gentext"]["sentences"]:
            assert isinstance(sentence["citations"], list)
        assert body["params"]["k"] == 10

    def test_breakdown_fields_present_when_requested(self, client):
        body = client.post("/api/search", json=FIVE_G).json()
        top = body["results"][0]
        for field in ("t_norm", "f", "stance", "similarity", "rsv", "degraded"):
            assert field in top

    def test_breakdown_omitted_by_default(self, client):
        body = client.post(
            "/api/search", json={"query": "can 5g antennas cause covid 19"}
        ).json()
        assert "t_norm" not in body["results"][0]
        assert "rsv" in body["results"][0]

    def test_rsv_invariant_client_checkable(self, client):
        body = client.post("/api/search", json=FIVE_G).json()
        beta = body["params"]["beta"]
        for row in body["results"]:
            assert row["rsv"] == pytest.approx(
                beta * row["t_norm"] + (1 - beta) * row["f"], abs=1e-9
            )

    def test_beta_override_reproduces_bm25_order(self, client):
        fused = client.post("/api/search", json=FIVE_G).json()
        pure = client.post("/api/search", json={**FIVE_G, "beta": 1.0}).json()
        by_t = sorted(
            pure["results"], key=lambda r: (-r["t_norm"], r["doc_id"])
        )
        assert [r["doc_id"] for r in pure["results"]] == [r["doc_id"] for r in by_t]
        assert fused["params"]["beta"] != pure["params"]["beta"]

    def test_identical_requests_identical_responses(self, client):
        first = client.post("/api/search", json=FIVE_G)
        second = client.post("/api/search", json=FIVE_G)
        body_a = first.json()
        body_b = second.json()
        assert body_a["results"] == body_b["results"]
        assert body_a["gentext"] == body_b["gentext"]
        # byte-identical modulo the per-request timing block
        strip = lambda body: {k: v for k, v in body.items() if k != "timings_ms"}
        import json as json_mod
        assert json_mod.dumps(strip(body_a), sort_keys=True) == \
            json_mod.dumps(strip(body_b), sort_keys=True)

    def test_empty_query_is_400(self, client):
        assert client.post("/api/search", json={"query": "  "}).status_code == 400

    def test_bad_ranges_are_400(self, client):
        assert client.post(
            "/api/search", json={"query": "x", "beta": 1.5}
        ).status_code == 400
        assert client.post(
            "/api/search", json={"query": "x", "top_n": 0}
        ).status_code == 400

    def test_k_override_rate_limited(self, fixture_index, providers):
        config = EngineConfig(articles_per_query=5, k_override_limit_per_minute=2)
        pipeline = SearchPipeline(fixture_index, providers, config)
        client = TestClient(create_app(pipeline, config))
        payload = {"query": "can 5g antennas cause covid 19", "k": 5}
        assert client.post("/api/search", json=payload).status_code == 200
        assert client.post("/api/search", json=payload).status_code == 200
        assert client.post("/api/search", json=payload).status_code == 429

    def test_provider_outage_is_502_with_stage(self, fixture_index, providers):
        class DeadKb:
            def search(self, query_text, m):
                raise KnowledgeBaseUnavailable("refused")

        broken = ProviderSet(
            embedding=providers.embedding, generation=providers.generation,
            stance=providers.stance, ner=providers.ner, knowledge_base=DeadKb(),
            fingerprint="dead",
        )
        config = EngineConfig()
        client = TestClient(create_app(SearchPipeline(fixture_index, broken, config),
                                       config))
        response = client.post("/api/search", json=FIVE_G)
        assert response.status_code == 502
        assert response.json()["stage"] == "evidence_retrieval"


class TestOtherEndpoints:
    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["status"] == "ok"
        assert body["doc_count"] > 0

    def test_config_echoes_defaults(self, client):
        body = client.get("/api/config").json()
        assert body["k"] == 10
        assert body["alpha"] == 0.65
        assert body["beta"] == 0.45
        assert body["providers"]["embedding"] == "double"

    def test_document_fetch_and_404(self, client):
        body = client.get("/api/document/web001").json()
        assert body["doc_id"] == "web001"
        assert body["title"]
        assert client.get("/api/document/nope").status_code == 404

    def test_kb_article_view_for_citations(self, client):
        search = client.post("/api/search", json=FIVE_G).json()
        cited = search["gentext"]["sentences"][0]["citations"][0]
        article = client.get(f"/api/kb/article/{cited}")
        assert article.status_code == 200
        assert article.json()["ref_id"] == cited

    def test_no_index_means_503(self):
        config = EngineConfig()
        client = TestClient(create_app(None, config))
        assert client.post("/api/search", json=FIVE_G).status_code == 503
        assert client.get("/api/health").json()["status"] == "degraded"
