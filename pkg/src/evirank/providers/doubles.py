"""Deterministic offline stand-ins for the four model providers and the
knowledge base.

Every double is a pure function of its inputs plus bundled data files, so
the whole pipeline is bit-reproducible across runs and platforms with no
external service.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

import numpy as np

from .. import corpus
from ..errors import NoEvidenceFound, ProviderFailure
from ..evidence import Article
from .base import EMBEDDING_DIM

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

NEGATION_TOKENS = frozenset({"no", "not", "never", "cannot"})


def _hash64(text: str, salt: bytes = b"") -> int:
    h = hashlib.blake2b(text.encode("utf-8"), digest_size=8, key=salt)
    return int.from_bytes(h.digest(), "big")


class HashEmbedding:
    """Bag-of-words embedding: each token hashes to one of D buckets with a
    sign from a second hash; the count vector is L2-normalized."""

    def __init__(self, dim: int = EMBEDDING_DIM):
        self.dim = dim

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ProviderFailure("embed", "empty batch")
        out = []
        for text in texts:
            if not text:
                raise ProviderFailure("embed", "empty text in batch")
            vec = np.zeros(self.dim, dtype=np.float64)
            for token in corpus.normalize_text(text):
                idx = _hash64(token) % self.dim
                sign = 1.0 if _hash64(token, salt=b"sign") % 2 == 0 else -1.0
                vec[idx] += sign
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                vec[0] = 1.0
            else:
                vec /= norm
            out.append(vec)
        return out


_CONTEXT_PAIR_RE = re.compile(r"([^()]+?)\s*\(Reference:\s*([A-Za-z0-9_.-]+)\s*\)")
_WORD_LIMIT_RE = re.compile(r"ONLY\s+(\d+)\s+words")


class TemplateGeneration:
    """Extractive generation: restate the three highest-listed context
    passages, one cited sentence each, staying inside the word limit."""

    max_sentences = 3

    def generate(self, prompt_text: str) -> str:
        if not prompt_text:
            raise ProviderFailure("generate", "empty prompt")
        context = self._context_section(prompt_text)
        pairs = _CONTEXT_PAIR_RE.findall(context)
        if not pairs:
            raise ProviderFailure("generate", "prompt contains no cited context passages")
        limit_match = _WORD_LIMIT_RE.search(prompt_text)
        limit = int(limit_match.group(1)) if limit_match else 64
        sentences = []
        words_used = 0
        for sentence, ref_id in pairs[: self.max_sentences]:
            sentence = sentence.strip().strip(".!?").strip()
            n_words = len(sentence.split())
            if sentences and words_used + n_words > limit:
                break
            sentences.append(f"{sentence} (Reference: {ref_id}).")
            words_used += n_words
        return " ".join(sentences)

    @staticmethod
    def _context_section(prompt_text: str) -> str:
        start = prompt_text.find("Context:")
        if start < 0:
            return ""
        section = prompt_text[start + len("Context:"):]
        cut = section.find("Write a paragraph")
        return section[:cut] if cut >= 0 else section


class OverlapStance:
    """Jaccard overlap of content tokens with a negation flip.

    Content tokens exclude the negation words themselves; if exactly one
    side contains a negation token the overlap score is multiplied by 0.2,
    so a statement and its negation score far apart.
    """

    negation_penalty = 0.2

    def stance(self, premise: str, hypothesis: str) -> float:
        if not premise or not hypothesis:
            raise ProviderFailure("stance", "premise and hypothesis must be non-empty")
        p_tokens = set(corpus.normalize_text(premise))
        h_tokens = set(corpus.normalize_text(hypothesis))
        p_content = p_tokens - NEGATION_TOKENS
        h_content = h_tokens - NEGATION_TOKENS
        union = p_content | h_content
        if not union:
            return 1.0 if p_tokens == h_tokens else 0.0
        score = len(p_content & h_content) / len(union)
        p_neg = bool(p_tokens & NEGATION_TOKENS)
        h_neg = bool(h_tokens & NEGATION_TOKENS)
        if p_neg != h_neg:
            score *= self.negation_penalty
        return score


class GazetteerNer:
    """Dictionary lookup over medicine and disease term lists.

    Terms are matched on normalized token sequences, longest match first,
    and reported with the gazetteer's canonical (lowercase) surface.
    """

    def __init__(self, medicines_path: Path | str | None = None,
                 diseases_path: Path | str | None = None):
        medicines_path = Path(medicines_path or DATA_DIR / "medicines.txt")
        diseases_path = Path(diseases_path or DATA_DIR / "diseases.txt")
        self._table: dict[tuple[str, ...], tuple[str, str]] = {}
        self._load(medicines_path, "medicine")
        self._load(diseases_path, "disease")
        self._max_len = max((len(k) for k in self._table), default=1)

    def _load(self, path: Path, entity_type: str) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                term = line.strip().lower()
                if not term or term.startswith("#"):
                    continue
                key = tuple(corpus.normalize_text(term))
                if key:
                    self._table.setdefault(key, (term, entity_type))

    def ner(self, text: str) -> list[tuple[str, str]]:
        tokens = corpus.normalize_text(text)
        found = []
        i = 0
        while i < len(tokens):
            hit = None
            for length in range(min(self._max_len, len(tokens) - i), 0, -1):
                entry = self._table.get(tuple(tokens[i:i + length]))
                if entry is not None:
                    hit = (entry, length)
                    break
            if hit is not None:
                (surface, entity_type), length = hit
                found.append((surface, entity_type))
                i += length
            else:
                i += 1
        return found


class FixtureKnowledgeBase:
    """Local article dump ranked with the same BM25 used for the corpus.

    Stands in for a remote scientific-literature search endpoint; article
    title and body are indexed together.
    """

    def __init__(self, articles_path: Path | str | None = None):
        articles_path = Path(articles_path or DATA_DIR / "fixture_kb.jsonl")
        self.articles: dict[str, Article] = {}
        docs = []
        with open(articles_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                article = Article(
                    ref_id=str(rec["ref_id"]),
                    title=rec.get("title", ""),
                    body=rec["text"],
                )
                self.articles[article.ref_id] = article
                docs.append(
                    corpus.Document(
                        doc_id=article.ref_id,
                        title=article.title,
                        body=f"{article.title}\n{article.body}",
                    )
                )
        self._index = corpus.build_index(docs)

    def search(self, query_text: str, m: int) -> list[Article]:
        if m < 1:
            raise ValueError("m must be >= 1")
        hits = corpus.retrieve_topical(
            self._index, corpus.QuerySpec(query_id="kb", text=query_text), n=m
        )
        if not hits:
            raise NoEvidenceFound(f"knowledge base has no match for: {query_text!r}")
        return [self.articles[doc_id] for doc_id, _ in hits]
