"""HTTP adapters for externally hosted model providers.

Each adapter speaks a small JSON protocol so any model runtime can be
attached behind it. Transport faults surface as ProviderFailure (or
KnowledgeBaseUnavailable for the knowledge base) after one retry with
exponential backoff.
"""

from __future__ import annotations

import time

import numpy as np
import requests

from ..errors import KnowledgeBaseUnavailable, NoEvidenceFound, ProviderFailure
from ..evidence import Article
from .base import ProviderConfig


class _HttpClient:
    retries = 1
    backoff = 0.5

    def __init__(self, config: ProviderConfig):
        self.config = config
        self.session = requests.Session()
        if config.token:
            self.session.headers["Authorization"] = f"Bearer {config.token}"

    def request(self, method: str, path: str, operation: str, **kwargs):
        url = self.config.endpoint.rstrip("/") + path
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self.session.request(
                    method, url, timeout=self.config.timeout, **kwargs
                )
                resp.raise_for_status()
                return resp.json()
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise ProviderFailure(operation, str(last_error))


class RemoteEmbedding(_HttpClient):
    """POST /embed {"texts": [...]} -> {"vectors": [[...], ...]}"""

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ProviderFailure("embed", "empty batch")
        vectors: list[np.ndarray] = []
        for start in range(0, len(texts), self.config.batch_size):
            batch = texts[start:start + self.config.batch_size]
            data = self.request("POST", "/embed", "embed", json={"texts": batch})
            raw = data.get("vectors")
            if not isinstance(raw, list) or len(raw) != len(batch):
                raise ProviderFailure("embed", "response vector count mismatch")
            for values in raw:
                vec = np.asarray(values, dtype=np.float64)
                norm = float(np.linalg.norm(vec))
                if norm == 0.0 or vec.ndim != 1:
                    raise ProviderFailure("embed", "non-normalizable vector in response")
                vectors.append(vec / norm)
        return vectors


class RemoteGeneration(_HttpClient):
    """POST /generate {"prompt": "..."} -> {"text": "..."}"""

    def generate(self, prompt_text: str) -> str:
        if not prompt_text:
            raise ProviderFailure("generate", "empty prompt")
        data = self.request("POST", "/generate", "generate", json={"prompt": prompt_text})
        text = data.get("text")
        if not isinstance(text, str):
            raise ProviderFailure("generate", "response missing 'text'")
        return text


class RemoteStance(_HttpClient):
    """POST /stance {"premise", "hypothesis"} -> {"score": 0..1}"""

    def stance(self, premise: str, hypothesis: str) -> float:
        if not premise or not hypothesis:
            raise ProviderFailure("stance", "premise and hypothesis must be non-empty")
        data = self.request(
            "POST", "/stance", "stance",
            json={"premise": premise, "hypothesis": hypothesis},
        )
        score = data.get("score")
        if not isinstance(score, (int, float)) or not 0.0 <= float(score) <= 1.0:
            raise ProviderFailure("stance", f"score out of range: {score!r}")
        return float(score)


class RemoteNer(_HttpClient):
    """POST /ner {"text": "..."} -> {"entities": [{"text", "type"}, ...]}"""

    def ner(self, text: str) -> list[tuple[str, str]]:
        data = self.request("POST", "/ner", "ner", json={"text": text})
        entities = data.get("entities")
        if not isinstance(entities, list):
            raise ProviderFailure("ner", "response missing 'entities'")
        out = []
        for item in entities:
            if not isinstance(item, dict) or "text" not in item or "type" not in item:
                raise ProviderFailure("ner", f"malformed entity: {item!r}")
            out.append((str(item["text"]), str(item["type"])))
        return out


class RemoteKnowledgeBase(_HttpClient):
    """GET /kb/search?q=...&m=N -> {"articles": [{"ref_id","title","text"}, ...]}"""

    def search(self, query_text: str, m: int) -> list[Article]:
        if m < 1:
            raise ValueError("m must be >= 1")
        try:
            data = self.request(
                "GET", "/kb/search", "kb_search",
                params={"q": query_text, "m": m},
            )
        except ProviderFailure as exc:
            raise KnowledgeBaseUnavailable(str(exc)) from exc
        articles = data.get("articles")
        if not isinstance(articles, list):
            raise KnowledgeBaseUnavailable("response missing 'articles'")
        if not articles:
            raise NoEvidenceFound(f"knowledge base has no match for: {query_text!r}")
        return [
            Article(
                ref_id=str(item["ref_id"]),
                title=item.get("title", ""),
                body=item["text"],
            )
            for item in articles[:m]
        ]
