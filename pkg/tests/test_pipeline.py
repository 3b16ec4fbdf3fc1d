import numpy as np
import pytest

from evirank.config import EngineConfig
from evirank.corpus import QuerySpec, retrieve_topical
from evirank.errors import KnowledgeBaseUnavailable, ProviderFailure
from evirank.fusion import emit_run
from evirank.pipeline import PipelineStageError, SearchPipeline, batch_run
from evirank.providers import ProviderSet

FIVE_G = QuerySpec(query_id="q5g", text="can 5g antennas cause covid 19")


class TestSearch:
    def test_end_to_end_fixture_run(self, fixture_pipeline):
        result = fixture_pipeline.search(FIVE_G, top_n=10)
        assert len(result.ranked.entries) >= 1
        text = result.ranked.gentext
        assert text is not None
        assert len(text.valid_sentences()) >= 1
        context_refs = {sp.passage.ref_id for sp in result.prepared.context}
        for sentence in text.valid_sentences():
            assert sentence.citations <= context_refs

    def test_deterministic_repeat(self, fixture_pipeline):
        first = fixture_pipeline.search(FIVE_G, top_n=10)
        second = fixture_pipeline.search(FIVE_G, top_n=10)
        assert first.ranked.entries == second.ranked.entries
        assert first.ranked.gentext.raw == second.ranked.gentext.raw

    def test_beta_one_matches_bm25_order(self, fixture_pipeline):
        result = fixture_pipeline.search(FIVE_G, beta=1.0)
        bm25 = retrieve_topical(fixture_pipeline.index, FIVE_G,
                                fixture_pipeline.config.candidate_pool)
        assert [d.doc_id for d in result.ranked.entries] == [doc for doc, _ in bm25]

    def test_rsv_invariant_on_entries(self, fixture_pipeline):
        result = fixture_pipeline.search(FIVE_G)
        params = result.ranked.params
        for doc in result.ranked.entries:
            expected = params["beta"] * doc.t_norm + (1 - params["beta"]) * doc.factual.f
            assert abs(doc.rsv - expected) < 1e-9

    def test_top_n_truncates(self, fixture_pipeline):
        result = fixture_pipeline.search(FIVE_G, top_n=2)
        assert len(result.ranked.entries) == 2

    def test_timings_reported(self, fixture_pipeline):
        result = fixture_pipeline.search(FIVE_G)
        for key in ("stage1_2_ms", "stage3_scoring_ms", "total_ms"):
            assert key in result.prepared.timings_ms


class TestGentextCache:
    def test_stage12_runs_once_per_query_and_k(self, fixture_index):
        class CountingGeneration:
            def __init__(self, inner):
                self.inner = inner
                self.calls = 0

            def generate(self, prompt_text):
                self.calls += 1
                return self.inner.generate(prompt_text)

        from evirank.providers import build_provider_set

        base = build_provider_set({})
        counting = CountingGeneration(base.generation)
        providers = ProviderSet(
            embedding=base.embedding, generation=counting, stance=base.stance,
            ner=base.ner, knowledge_base=base.knowledge_base,
            fingerprint=base.fingerprint,
        )
        pipeline = SearchPipeline(fixture_index, providers,
                                  EngineConfig(articles_per_query=5))
        pipeline.search(FIVE_G, beta=0.45)
        pipeline.search(FIVE_G, beta=1.0)
        pipeline.search(FIVE_G, alpha=0.2)
        assert counting.calls == 1
        pipeline.search(FIVE_G, k=5)  # k override bypasses the cached entry
        assert counting.calls == 2


class TestDegradedModes:
    def test_no_evidence_becomes_topicality_only(self, fixture_index, providers):
        pipeline = SearchPipeline(fixture_index, providers, EngineConfig())
        # in the corpus ("wellness", "standing desks") but not in the KB
        query = QuerySpec(query_id="qq", text="standing desks wellness newsletter")
        result = pipeline.search(query)
        assert any(w.startswith("no_evidence") for w in result.prepared.warnings)
        assert result.ranked.gentext is None
        assert result.ranked.entries
        assert all(doc.degraded for doc in result.ranked.entries)
        bm25 = retrieve_topical(fixture_index, query, 100)
        assert [d.doc_id for d in result.ranked.entries] == [doc for doc, _ in bm25]

    def test_kb_outage_is_stage_error(self, fixture_index, providers):
        class DeadKb:
            def search(self, query_text, m):
                raise KnowledgeBaseUnavailable("connection refused")

        broken = ProviderSet(
            embedding=providers.embedding, generation=providers.generation,
            stance=providers.stance, ner=providers.ner, knowledge_base=DeadKb(),
            fingerprint="dead",
        )
        pipeline = SearchPipeline(fixture_index, broken, EngineConfig())
        with pytest.raises(PipelineStageError) as err:
            pipeline.search(FIVE_G)
        assert err.value.stage == "evidence_retrieval"

    def test_generation_outage_falls_back(self, fixture_index, providers):
        class DeadGeneration:
            def generate(self, prompt_text):
                raise ProviderFailure("generate", "model offline")

        degraded = ProviderSet(
            embedding=providers.embedding, generation=DeadGeneration(),
            stance=providers.stance, ner=providers.ner,
            knowledge_base=providers.knowledge_base, fingerprint="nogen",
        )
        pipeline = SearchPipeline(fixture_index, degraded,
                                  EngineConfig(articles_per_query=5))
        result = pipeline.search(FIVE_G)
        assert result.ranked.gentext is not None
        assert result.ranked.gentext.origin == "fallback"
        assert any(w.startswith("generation_fallback") for w in result.prepared.warnings)

    def test_stance_outage_degrades_documents(self, fixture_index, providers):
        class DeadStance:
            def stance(self, premise, hypothesis):
                raise ProviderFailure("stance", "down")

        degraded = ProviderSet(
            embedding=providers.embedding, generation=providers.generation,
            stance=DeadStance(), ner=providers.ner,
            knowledge_base=providers.knowledge_base, fingerprint="nostance",
        )
        pipeline = SearchPipeline(fixture_index, degraded,
                                  EngineConfig(articles_per_query=5))
        result = pipeline.search(FIVE_G)
        assert result.ranked.entries
        for doc in result.ranked.entries:
            assert doc.degraded
            assert doc.factual.stance is None
            assert doc.factual.f == doc.factual.similarity


class TestBatchRun:
    def test_batch_equals_single_search(self, fixture_pipeline, fixture_topics):
        lines = batch_run(fixture_pipeline, fixture_topics, tag="t")
        rebuilt = []
        for topic in fixture_topics:
            result = fixture_pipeline.search(topic)
            if result.ranked.entries:
                rebuilt.extend(emit_run(result.ranked, "t"))
        assert lines == rebuilt


class TestConcurrency:
    def test_concurrent_searches_match_serial_results(self, fixture_pipeline,
                                                      fixture_topics):
        from concurrent.futures import ThreadPoolExecutor

        queries = fixture_topics * 3
        serial = [fixture_pipeline.search(q).ranked.entries for q in queries]
        with ThreadPoolExecutor(max_workers=8) as pool:
            concurrent = list(pool.map(
                lambda q: fixture_pipeline.search(q).ranked.entries, queries
            ))
        assert concurrent == serial
