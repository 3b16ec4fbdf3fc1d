"""Stage 1: fetch knowledge-base articles, split them into one-sentence
passages, and score passages against the query with an entity-aware discount.

A passage keeps the identifier of the article it came from, so every piece
of evidence stays traceable to its bibliographic reference.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .corpus import QuerySpec, normalize_text
from .errors import NoEvidenceFound, ProviderFailure

if TYPE_CHECKING:
    from .providers.base import EmbeddingProvider, KnowledgeBaseClient, NerProvider

DEFAULT_D_NE = 0.7

_DATA_DIR = Path(__file__).resolve().parent / "data"
_BOUNDARY_RE = re.compile(r"[.!?]+")


@dataclass(frozen=True)
class Article:
    """A knowledge-base article with its bibliographic identifier."""

    ref_id: str
    title: str
    body: str


@dataclass
class Passage:
    """One sentence of an article; ordinal is its position within the article."""

    ref_id: str
    sentence: str
    ordinal: int
    embedding: np.ndarray | None = None


@dataclass(frozen=True)
class EntitySet:
    """Medicine and disease mentions, lowercased and trimmed."""

    medicines: frozenset[str] = frozenset()
    diseases: frozenset[str] = frozenset()

    def all_terms(self) -> frozenset[str]:
        return self.medicines | self.diseases

    def is_empty(self) -> bool:
        return not self.medicines and not self.diseases


@dataclass(frozen=True)
class ScoredPassage:
    """A passage with its cosine similarity and entity-discounted score."""

    passage: Passage
    sim: float
    discounted: bool
    sigma: float


def load_abbreviations(path: str | Path | None = None) -> frozenset[str]:
    """Read the one-abbreviation-per-line exception list for the splitter."""
    path = Path(path or _DATA_DIR / "abbreviations.txt")
    terms = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if term and not term.startswith("#"):
                terms.add(term)
    return frozenset(terms)


_DEFAULT_ABBREVIATIONS: frozenset[str] | None = None


def _default_abbreviations() -> frozenset[str]:
    global _DEFAULT_ABBREVIATIONS
    if _DEFAULT_ABBREVIATIONS is None:
        _DEFAULT_ABBREVIATIONS = load_abbreviations()
    return _DEFAULT_ABBREVIATIONS


def split_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Split text on terminal punctuation followed by whitespace and a
    capital letter (or end of text).

    A period does not end a sentence when the word carrying it is on the
    abbreviation list ("mg.", "e.g.", ...). Runs containing ! or ? always
    qualify as terminal.
    """
    if abbreviations is None:
        abbreviations = _default_abbreviations()
    sentences = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        end = match.end()
        tail = text[end:]
        if not tail.strip():
            break  # final segment is collected below
        if not (tail[0].isspace() and tail.lstrip()[0].isupper()):
            continue
        if "!" not in match.group() and "?" not in match.group():
            prev = re.search(r"\S+$", text[:end])
            word = prev.group().lower().lstrip("\"'([{") if prev else ""
            if word in abbreviations:
                continue
        sentence = text[start:end].strip()
        if sentence:
            sentences.append(sentence)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def segment_sentences(article: Article,
                      abbreviations: frozenset[str] | None = None) -> list[Passage]:
    """One passage per sentence of the article body, ordinals from 0."""
    if not article.body.strip():
        raise ValueError(f"article {article.ref_id} has an empty body")
    return [
        Passage(ref_id=article.ref_id, sentence=sentence, ordinal=i)
        for i, sentence in enumerate(split_sentences(article.body, abbreviations))
    ]


def entity_extract(text: str, ner: "NerProvider") -> EntitySet:
    """Run the NER provider and keep only medicine and disease mentions."""
    try:
        entities = ner.ner(text)
    except ProviderFailure as exc:
        raise ProviderFailure("ner", f"{exc} while tagging: {text[:80]!r}") from exc
    medicines = set()
    diseases = set()
    for surface, entity_type in entities:
        surface = surface.strip().lower()
        if not surface:
            continue
        if entity_type == "medicine":
            medicines.add(surface)
        elif entity_type == "disease":
            diseases.add(surface)
    return EntitySet(medicines=frozenset(medicines), diseases=frozenset(diseases))


def entities_match(q_entities: EntitySet, p_entities: EntitySet) -> bool:
    """No discount when the query carries no medical entities at all;
    otherwise the passage must share at least one of them."""
    if q_entities.is_empty():
        return True
    return bool(q_entities.all_terms() & p_entities.all_terms())


def cosine_unit(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two unit vectors, clamped into [0, 1]."""
    return min(1.0, max(0.0, float(np.dot(a, b))))


def score_passage(
    query_embedding: np.ndarray,
    passage: Passage,
    q_entities: EntitySet,
    p_entities: EntitySet,
    d_ne: float = DEFAULT_D_NE,
) -> ScoredPassage:
    """Similarity with the entity discount applied when entities disagree."""
    if not 0.0 < d_ne < 1.0:
        raise ValueError("d_ne must lie in (0, 1)")
    if passage.embedding is None:
        raise ValueError("passage must be embedded before scoring")
    sim = cosine_unit(query_embedding, passage.embedding)
    discounted = not entities_match(q_entities, p_entities)
    sigma = d_ne * sim if discounted else sim
    return ScoredPassage(passage=passage, sim=sim, discounted=discounted, sigma=sigma)


def fetch_articles(query: QuerySpec, kb: "KnowledgeBaseClient", m: int = 1) -> list[Article]:
    """Top-m articles for the query from the knowledge base."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return kb.search(query.text, m)


def top_k_passages(
    query: QuerySpec,
    articles: list[Article],
    k: int,
    embedder: "EmbeddingProvider",
    ner: "NerProvider",
    d_ne: float = DEFAULT_D_NE,
    abbreviations: frozenset[str] | None = None,
) -> list[ScoredPassage]:
    """Embed and score every sentence of every article, return the top k.

    Ordering is sigma descending with (ref_id, ordinal) as the tie break.
    Sentences whose normalized text is identical are deduplicated, keeping
    the highest-sigma occurrence.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    passages: list[Passage] = []
    for article in articles:
        passages.extend(segment_sentences(article, abbreviations))
    if not passages:
        raise NoEvidenceFound("articles produced no passages")

    vectors = embedder.embed([query.text] + [p.sentence for p in passages])
    query_embedding = vectors[0]
    q_entities = entity_extract(query.text, ner)

    scored: list[ScoredPassage] = []
    for passage, embedding in zip(passages, vectors[1:]):
        passage = replace(passage, embedding=embedding)
        p_entities = entity_extract(passage.sentence, ner)
        scored.append(score_passage(query_embedding, passage, q_entities, p_entities, d_ne))

    best: dict[str, ScoredPassage] = {}
    for sp in scored:
        key = " ".join(normalize_text(sp.passage.sentence))
        kept = best.get(key)
        if kept is None or sp.sigma > kept.sigma:
            best[key] = sp
    if not best:
        raise NoEvidenceFound("no passages survived deduplication")

    ranked = sorted(
        best.values(),
        key=lambda sp: (-sp.sigma, sp.passage.ref_id, sp.passage.ordinal),
    )
    return ranked[:k]
