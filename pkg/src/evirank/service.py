"""HTTP search service exposing the pipeline with full score breakdowns.

The generated reference text travels with every response so the interface
can explain why a document was judged factually accurate. Per-request
alpha/beta overrides re-rank cached stage results; k overrides force a
fresh retrieval and are rate limited.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import deque
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import EngineConfig
from .corpus import QuerySpec
from .errors import UnknownDocument
from .fusion import RankedList
from .gentext import GenText
from .pipeline import PipelineStageError, SearchPipeline
from .providers.doubles import FixtureKnowledgeBase

logger = logging.getLogger(__name__)


class SearchRequest(BaseModel):
    query: str
    top_n: int = 10
    alpha: float | None = None
    beta: float | None = None
    k: int | None = None
    include_breakdown: bool = False


class _KOverrideLimiter:
    """Sliding-window limit on full re-retrievals triggered by k overrides."""

    def __init__(self, per_minute: int):
        self.per_minute = per_minute
        self._events: deque[float] = deque()
        self._lock = threading.Lock()

    def allow(self) -> bool:
        now = time.monotonic()
        with self._lock:
            while self._events and now - self._events[0] > 60.0:
                self._events.popleft()
            if len(self._events) >= self.per_minute:
                return False
            self._events.append(now)
            return True


def _gentext_payload(text: GenText | None) -> dict | None:
    if text is None:
        return None
    return {
        "origin": text.origin,
        "word_count": text.word_count,
        "sentences": [
            {
                "text": sentence.text,
                "citations": sorted(sentence.citations),
                "valid": sentence.valid,
            }
            for sentence in text.sentences
        ],
        "warnings": list(text.warnings),
    }


def _entries_payload(ranked: RankedList, pipeline: SearchPipeline,
                     include_breakdown: bool) -> list[dict]:
    entries = []
    for doc in ranked.entries:
        stored = pipeline.index.documents.get(doc.doc_id)
        row = {
            "doc_id": doc.doc_id,
            "title": stored.title if stored else "",
            "url": stored.url if stored else "",
            "rsv": doc.rsv,
            "degraded": doc.degraded,
        }
        if include_breakdown:
            row.update(
                {
                    "t_raw": doc.t_raw,
                    "t_norm": doc.t_norm,
                    "f": doc.factual.f,
                    "stance": doc.factual.stance,
                    "similarity": doc.factual.similarity,
                }
            )
        entries.append(row)
    return entries


def create_app(pipeline: SearchPipeline | None, config: EngineConfig) -> FastAPI:
    """Build the service; pipeline may be None when no index is loaded."""
    app = FastAPI(title="evirank search service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    limiter = _KOverrideLimiter(config.k_override_limit_per_minute)

    @app.get("/api/health")
    def health():
        return {
            "status": "ok" if pipeline is not None else "degraded",
            "index_loaded": pipeline is not None,
            "doc_count": pipeline.index.doc_count if pipeline is not None else 0,
        }

    @app.get("/api/config")
    def get_config():
        return config.as_dict()

    @app.get("/api/document/{doc_id}")
    def get_document(doc_id: str):
        if pipeline is None:
            raise HTTPException(status_code=503, detail="no index loaded")
        try:
            doc = pipeline.index.get_document(doc_id)
        except UnknownDocument:
            raise HTTPException(status_code=404, detail=f"unknown document: {doc_id}")
        return {
            "doc_id": doc.doc_id,
            "title": doc.title,
            "url": doc.url,
            "text": doc.body,
            "dataset": doc.dataset,
        }

    @app.get("/api/kb/article/{ref_id}")
    def get_kb_article(ref_id: str):
        # Citation drill-down for offline mode; only the fixture knowledge
        # base can serve article bodies locally.
        if pipeline is None:
            raise HTTPException(status_code=503, detail="no index loaded")
        kb = pipeline.providers.knowledge_base
        if isinstance(kb, FixtureKnowledgeBase) and ref_id in kb.articles:
            article = kb.articles[ref_id]
            return {"ref_id": article.ref_id, "title": article.title, "text": article.body}
        raise HTTPException(status_code=404, detail=f"unknown article: {ref_id}")

    @app.post("/api/search")
    def search(request: SearchRequest):
        if pipeline is None:
            raise HTTPException(status_code=503, detail="no index loaded")
        if not request.query.strip():
            raise HTTPException(status_code=400, detail="query must be non-empty")
        if request.top_n < 1:
            raise HTTPException(status_code=400, detail="top_n must be >= 1")
        for name in ("alpha", "beta"):
            value = getattr(request, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise HTTPException(status_code=400, detail=f"{name} must lie in [0, 1]")
        if request.k is not None and request.k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        if request.k is not None and request.k != config.k and not limiter.allow():
            raise HTTPException(status_code=429, detail="too many k overrides; retry later")

        query = QuerySpec(query_id="adhoc", text=request.query.strip())
        try:
            result = pipeline.search(
                query, k=request.k, alpha=request.alpha, beta=request.beta,
                top_n=request.top_n,
            )
        except PipelineStageError as exc:
            return JSONResponse(
                status_code=502,
                content={"detail": str(exc.cause), "stage": exc.stage},
            )
        ranked = result.ranked
        return {
            "query": request.query,
            "results": _entries_payload(ranked, pipeline, request.include_breakdown),
            "gentext": _gentext_payload(ranked.gentext),
            "params": ranked.params,
            "timings_ms": result.prepared.timings_ms,
            "warnings": result.prepared.warnings,
        }

    if config.frontend_dist:
        dist = Path(config.frontend_dist)
        if dist.is_dir():
            app.mount("/", StaticFiles(directory=dist, html=True), name="frontend")
        else:
            logger.warning("frontend_dist %s does not exist; skipping static mount",
                           dist)
    return app
