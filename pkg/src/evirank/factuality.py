"""Stage 3a: factual accuracy of a candidate document against GenText.

Two signals enter the score: a stance-detection provider judging how much
the document supports the evidence-grounded text, and the cosine similarity
of their embeddings. Both live in [0, 1] and are mixed with the weight
alpha. A provider fault leaves that side missing instead of dropping the
document from the ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .corpus import Document, normalize_text, strip_tags
from .errors import DomainError, ProviderFailure
from .evidence import cosine_unit, split_sentences
from .gentext import GenText

if TYPE_CHECKING:
    from .providers.base import EmbeddingProvider, StanceProvider

DEFAULT_ALPHA = 0.65
STANCE_CHUNK_TOKENS = 400  # max normalized tokens per stance premise chunk
STANCE_TOP_CHUNKS = 2      # aggregate = mean of the best chunks
DOC_EMBED_SENTENCES = 64   # sentences mean-pooled into the document embedding


@dataclass(frozen=True)
class FactualScore:
    """Per-document factual accuracy breakdown.

    stance or similarity is None when its provider failed; the combination
    then falls back to the side that is present (0.0 if both are missing),
    and the document is reported as degraded.
    """

    doc_id: str
    stance: float | None
    similarity: float | None
    alpha: float
    f: float

    @property
    def degraded(self) -> bool:
        return self.stance is None or self.similarity is None


def factual_accuracy(stance: float, similarity: float, alpha: float) -> float:
    """Weighted mix alpha * stance + (1 - alpha) * similarity."""
    for name, value in (("stance", stance), ("similarity", similarity), ("alpha", alpha)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return alpha * stance + (1.0 - alpha) * similarity


def combine_factual(doc_id: str, stance: float | None, similarity: float | None,
                    alpha: float) -> FactualScore:
    """Build a FactualScore, tolerating missing provider sides."""
    if stance is not None and similarity is not None:
        f = factual_accuracy(stance, similarity, alpha)
    elif stance is None and similarity is None:
        f = 0.0
    elif stance is None:
        f = float(similarity)
    else:
        f = float(stance)
    return FactualScore(doc_id=doc_id, stance=stance, similarity=similarity,
                        alpha=alpha, f=f)


def chunk_sentences(text: str, max_tokens: int = STANCE_CHUNK_TOKENS) -> list[str]:
    """Group consecutive sentences into chunks of at most max_tokens
    normalized tokens; an oversized single sentence forms its own chunk."""
    chunks = []
    current: list[str] = []
    current_tokens = 0
    for sentence in split_sentences(strip_tags(text)):
        n_tokens = len(normalize_text(sentence))
        if current and current_tokens + n_tokens > max_tokens:
            chunks.append(" ".join(current))
            current = []
            current_tokens = 0
        current.append(sentence)
        current_tokens += n_tokens
    if current:
        chunks.append(" ".join(current))
    return chunks


def aggregate_chunk_scores(scores: list[float], top: int = STANCE_TOP_CHUNKS) -> float:
    """Mean of the `top` highest chunk scores."""
    if not scores:
        return 0.0
    best = sorted(scores, reverse=True)[:top]
    return sum(best) / len(best)


def stance_score(doc: Document, gentext: GenText, provider: "StanceProvider",
                 per_sentence: bool = False) -> float:
    """Stance of a document toward GenText, aggregated over premise chunks.

    Premise = document chunk, hypothesis = the GenText valid-sentence text
    (or each valid sentence separately in per_sentence mode, averaged).
    """
    if not gentext.valid_sentences():
        raise ValueError("gentext has no valid sentence to take a stance on")
    chunks = chunk_sentences(doc.body)
    if not chunks:
        return 0.0
    if per_sentence:
        per_sentence_scores = []
        for sentence in gentext.valid_sentences():
            scores = [provider.stance(chunk, sentence.text) for chunk in chunks]
            per_sentence_scores.append(aggregate_chunk_scores(scores))
        return sum(per_sentence_scores) / len(per_sentence_scores)
    hypothesis = gentext.valid_text()
    scores = [provider.stance(chunk, hypothesis) for chunk in chunks]
    return aggregate_chunk_scores(scores)


def document_embedding(doc: Document, embedder: "EmbeddingProvider",
                       max_sentences: int = DOC_EMBED_SENTENCES) -> np.ndarray:
    """Unit-normalized mean of the embeddings of the first sentences."""
    sentences = split_sentences(strip_tags(doc.body))[:max_sentences]
    if not sentences:
        raise ProviderFailure("embed", f"document {doc.doc_id} has no sentences")
    vectors = embedder.embed(sentences)
    mean = np.mean(np.stack(vectors), axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        mean = np.zeros_like(mean)
        mean[0] = 1.0
        return mean
    return mean / norm


def semantic_similarity(doc: Document, gentext: GenText,
                        embedder: "EmbeddingProvider") -> float:
    """Clamped cosine between the document embedding and the GenText embedding."""
    if gentext.embedding is None:
        raise ValueError("gentext must be embedded before similarity scoring")
    return cosine_unit(document_embedding(doc, embedder), gentext.embedding)


def score_document(
    doc: Document,
    gentext: GenText,
    stance_provider: "StanceProvider",
    embedder: "EmbeddingProvider",
    alpha: float = DEFAULT_ALPHA,
    per_sentence: bool = False,
) -> FactualScore:
    """Full factual-accuracy scoring for one document, fault tolerant.

    Either provider failing records that side as missing rather than
    raising, so a ranking is always produced.
    """
    stance: float | None
    similarity: float | None
    try:
        stance = stance_score(doc, gentext, stance_provider, per_sentence)
    except ProviderFailure:
        stance = None
    try:
        similarity = semantic_similarity(doc, gentext, embedder)
    except ProviderFailure:
        similarity = None
    return combine_factual(doc.doc_id, stance, similarity, alpha)
