"""Three-stage search pipeline: evidence retrieval, reference-text
generation, and fused ranking.

Stage 1 and 2 results are cached per (query, k, provider fingerprint), so
re-ranking with different alpha/beta weights only repeats the cheap fusion
arithmetic. Provider faults degrade individual documents instead of
aborting the query wherever the contracts allow it.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from . import evidence, factuality, fusion, gentext as gentext_mod
from .config import EngineConfig
from .corpus import InvertedIndex, QuerySpec, retrieve_topical
from .errors import (
    EviRankError,
    GenerationFailed,
    KnowledgeBaseUnavailable,
    NoEvidenceFound,
    ProviderFailure,
)
from .evidence import ScoredPassage
from .fusion import RankedList, ScoredDoc, rank
from .gentext import GenText
from .providers import ProviderSet

_CACHE_MAX_ENTRIES = 256


class PipelineStageError(EviRankError):
    """A provider fault that makes a whole stage impossible."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass
class CandidateScore:
    """Alpha/beta-independent raw scores for one candidate document."""

    doc_id: str
    t_raw: float
    stance: float | None
    similarity: float | None


@dataclass
class PreparedQuery:
    """Stages 1-3a output for one query; ready for cheap re-ranking."""

    query: QuerySpec
    k: int
    context: list[ScoredPassage]
    gentext: GenText | None
    candidates: list[CandidateScore]
    warnings: list[str] = field(default_factory=list)
    timings_ms: dict[str, float] = field(default_factory=dict)


@dataclass
class SearchResult:
    ranked: RankedList
    prepared: PreparedQuery


class SearchPipeline:
    """Executes the staged search over one index with one provider set."""

    def __init__(self, index: InvertedIndex, providers: ProviderSet,
                 config: EngineConfig | None = None):
        self.index = index
        self.providers = providers
        self.config = config or EngineConfig()
        self._gentext_cache: dict[tuple[str, int, str], tuple[GenText | None, list[ScoredPassage], list[str]]] = {}
        self._cache_lock = threading.Lock()

    # -- stages ------------------------------------------------------------

    def _stage1_evidence(self, query: QuerySpec, k: int) -> tuple[list[ScoredPassage], list[str]]:
        warnings: list[str] = []
        try:
            articles = evidence.fetch_articles(
                query, self.providers.knowledge_base, m=self.config.articles_per_query
            )
            context = evidence.top_k_passages(
                query,
                articles,
                k,
                self.providers.embedding,
                self.providers.ner,
                d_ne=self.config.d_ne,
            )
        except NoEvidenceFound as exc:
            warnings.append(f"no_evidence: {exc}")
            return [], warnings
        except KnowledgeBaseUnavailable as exc:
            raise PipelineStageError("evidence_retrieval", exc) from exc
        except ProviderFailure as exc:
            raise PipelineStageError("evidence_retrieval", exc) from exc
        return context, warnings

    def _stage2_gentext(self, query: QuerySpec,
                        context: list[ScoredPassage]) -> tuple[GenText | None, list[str]]:
        if not context:
            return None, []
        warnings: list[str] = []
        prompt = gentext_mod.build_prompt(query.text, context, self.config.word_limit)
        try:
            raw = gentext_mod.generate(
                prompt, self.providers.generation, self.config.retries, context
            )
            text = gentext_mod.parse_gentext(
                raw, context, word_limit=self.config.word_limit
            )
        except (GenerationFailed, ProviderFailure) as exc:
            warnings.append(f"generation_fallback: {exc}")
            text = gentext_mod.fallback_gentext(context, self.config.word_limit)
        warnings.extend(text.warnings)
        try:
            text.embedding = self.providers.embedding.embed([text.valid_text()])[0]
        except ProviderFailure as exc:
            warnings.append(f"gentext_embedding_failed: {exc}")
        return text, warnings

    def _cached_stage12(self, query: QuerySpec, k: int):
        key = (query.text, k, self.providers.fingerprint)
        with self._cache_lock:
            hit = self._gentext_cache.get(key)
        if hit is not None:
            return hit
        context, warnings1 = self._stage1_evidence(query, k)
        text, warnings2 = self._stage2_gentext(query, context)
        value = (text, context, warnings1 + warnings2)
        with self._cache_lock:
            if len(self._gentext_cache) >= _CACHE_MAX_ENTRIES:
                self._gentext_cache.pop(next(iter(self._gentext_cache)))
            self._gentext_cache[key] = value
        return value

    def prepare(self, query: QuerySpec, k: int | None = None) -> PreparedQuery:
        """Run stages 1, 2 and the provider-heavy part of stage 3."""
        cfg = self.config
        k = cfg.k if k is None else k
        timings: dict[str, float] = {}

        started = time.perf_counter()
        text, context, warnings = self._cached_stage12(query, k)
        timings["stage1_2_ms"] = (time.perf_counter() - started) * 1000.0

        started = time.perf_counter()
        pool = retrieve_topical(self.index, query, cfg.candidate_pool,
                                k1=cfg.bm25_k1, b=cfg.bm25_b)
        candidates: list[CandidateScore] = []
        usable = text is not None and bool(text.valid_sentences())
        for doc_id, t_raw in pool:
            stance: float | None = None
            similarity: float | None = None
            if usable:
                doc = self.index.get_document(doc_id)
                try:
                    stance = factuality.stance_score(
                        doc, text, self.providers.stance,
                        per_sentence=cfg.stance_per_sentence,
                    )
                except ProviderFailure:
                    stance = None
                try:
                    similarity = factuality.semantic_similarity(
                        doc, text, self.providers.embedding
                    )
                except (ProviderFailure, ValueError):
                    similarity = None
            candidates.append(CandidateScore(doc_id=doc_id, t_raw=t_raw,
                                             stance=stance, similarity=similarity))
        timings["stage3_scoring_ms"] = (time.perf_counter() - started) * 1000.0
        if not pool:
            warnings = warnings + ["no_topical_match: query shares no term with the corpus"]
        return PreparedQuery(query=query, k=k, context=context, gentext=text,
                             candidates=candidates, warnings=list(warnings),
                             timings_ms=timings)

    def rank_prepared(self, prepared: PreparedQuery, alpha: float | None = None,
                      beta: float | None = None) -> RankedList:
        """Fuse the prepared scores into the final ranking (cheap, reusable)."""
        cfg = self.config
        alpha = cfg.alpha if alpha is None else alpha
        beta = cfg.beta if beta is None else beta
        params = {"k": prepared.k, "alpha": alpha, "beta": beta, "d_ne": cfg.d_ne}
        if not prepared.candidates:
            return RankedList(query_id=prepared.query.query_id, entries=[],
                              gentext=prepared.gentext, params=params)
        t_norms = fusion.normalize_topicality(
            [(c.doc_id, c.t_raw) for c in prepared.candidates]
        )
        no_gentext = prepared.gentext is None
        scored = []
        for (doc_id, t_norm), cand in zip(t_norms, prepared.candidates):
            factual = factuality.combine_factual(doc_id, cand.stance, cand.similarity, alpha)
            rsv = fusion.fuse(t_norm, factual.f, beta)
            scored.append(
                ScoredDoc(doc_id=doc_id, t_raw=cand.t_raw, t_norm=t_norm,
                          factual=factual, rsv=rsv,
                          degraded=factual.degraded or no_gentext)
            )
        return rank(prepared.query.query_id, scored, prepared.gentext, params)

    def search(self, query: QuerySpec, k: int | None = None,
               alpha: float | None = None, beta: float | None = None,
               top_n: int | None = None) -> SearchResult:
        """Full pipeline for one query; top_n=None keeps the whole pool."""
        started = time.perf_counter()
        prepared = self.prepare(query, k=k)
        ranked = self.rank_prepared(prepared, alpha=alpha, beta=beta)
        prepared.timings_ms["total_ms"] = (time.perf_counter() - started) * 1000.0
        if top_n is not None:
            ranked = RankedList(query_id=ranked.query_id,
                                entries=ranked.entries[:top_n],
                                gentext=ranked.gentext, params=ranked.params)
        return SearchResult(ranked=ranked, prepared=prepared)


def batch_run(pipeline: SearchPipeline, topics: list[QuerySpec], tag: str,
              k: int | None = None, alpha: float | None = None,
              beta: float | None = None) -> list[str]:
    """Run every topic through the same code path as single search and
    collect run-file lines; topics with an empty ranking are skipped."""
    lines: list[str] = []
    for topic in topics:
        result = pipeline.search(topic, k=k, alpha=alpha, beta=beta)
        if result.ranked.entries:
            lines.extend(fusion.emit_run(result.ranked, tag))
    return lines
