"""Document collection, text normalization, inverted index and BM25 topicality.

The index is built once from an ingested collection and is immutable
afterwards, so it can be shared across threads for read-only scoring.
"""

from __future__ import annotations

import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DuplicateDocument, EmptyCollection, UnknownDocument

logger = logging.getLogger(__name__)

# Okapi defaults; the source material leaves both unspecified.
DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

INDEX_FORMAT = "evirank-index"
INDEX_VERSION = 1

# Alphanumeric runs only: every other character (including "_" and "-") is a
# separator, so "covid-19" tokenizes to ["covid", "19"].
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_TAG_RE = re.compile(r"<[^>]*>")

DATASETS = ("clef2020", "trec2020", "fixture")


@dataclass(frozen=True)
class Document:
    """One retrievable corpus item."""

    doc_id: str
    title: str
    body: str
    url: str = ""
    dataset: str = "fixture"


@dataclass(frozen=True)
class QuerySpec:
    """A search topic: query text plus optional narrative and expected answer."""

    query_id: str
    text: str
    narrative: str = ""
    expected_answer: str = ""  # "yes" / "no" / "" (none)


def normalize_text(raw: str) -> list[str]:
    """Lowercase, drop punctuation and split into tokens.

    Idempotent: normalizing the space-joined output returns the same tokens.
    Empty or punctuation-only input yields an empty list.
    """
    return _TOKEN_RE.findall(raw.lower())


def strip_tags(raw: str) -> str:
    """Replace markup tags with spaces so adjacent words stay separated."""
    return _TAG_RE.sub(" ", raw)


@dataclass
class InvertedIndex:
    """Term postings plus the per-document statistics BM25 needs.

    Construction happens in build_index; instances are treated as immutable
    afterwards (single writer, many concurrent readers).
    """

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    documents: dict[str, Document] = field(default_factory=dict)

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_doc_length(self) -> float:
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.doc_lengths

    def get_document(self, doc_id: str) -> Document:
        if doc_id not in self.documents:
            raise UnknownDocument(doc_id)
        return self.documents[doc_id]


def build_index(docs: list[Document]) -> InvertedIndex:
    """Build an inverted index over the normalized document bodies.

    Documents whose body normalizes to zero tokens are logged and skipped.
    Raises EmptyCollection when nothing survives ingest.
    """
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    stored: dict[str, Document] = {}
    for doc in docs:
        if not doc.doc_id:
            raise ValueError("document with empty doc_id")
        if doc.doc_id in doc_lengths:
            raise DuplicateDocument(f"duplicate doc_id at ingest: {doc.doc_id}")
        tokens = normalize_text(strip_tags(doc.body))
        if not tokens:
            logger.warning("skipping %s: body is empty after normalization", doc.doc_id)
            continue
        doc_lengths[doc.doc_id] = len(tokens)
        stored[doc.doc_id] = doc
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((doc.doc_id, tf))
    if not doc_lengths:
        raise EmptyCollection("no document with a non-empty normalized body")
    return InvertedIndex(postings=postings, doc_lengths=doc_lengths, documents=stored)


def bm25_score(
    index: InvertedIndex,
    query: QuerySpec,
    doc_id: str,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> float:
    """Okapi BM25 score of one document for one query.

    IDF is the non-negative variant ln(1 + (N - n + 0.5) / (n + 0.5)), so the
    score is 0 exactly when no query term occurs in the document. Repeated
    query tokens contribute once per occurrence.
    """
    if doc_id not in index.doc_lengths:
        raise UnknownDocument(doc_id)
    n_docs = index.doc_count
    avgdl = index.avg_doc_length
    dl = index.doc_lengths[doc_id]
    score = 0.0
    for term in normalize_text(query.text):
        plist = index.postings.get(term)
        if plist is None:
            continue
        tf = 0
        for posted_id, posted_tf in plist:
            if posted_id == doc_id:
                tf = posted_tf
                break
        if tf == 0:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
        score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))
    return score


def retrieve_topical(
    index: InvertedIndex,
    query: QuerySpec,
    n: int,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> list[tuple[str, float]]:
    """Top-n documents by BM25, ties broken by ascending doc_id.

    Only documents sharing at least one term with the query are returned, so
    the result can be shorter than n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    candidates: set[str] = set()
    for term in set(normalize_text(query.text)):
        for doc_id, _ in index.postings.get(term, ()):
            candidates.add(doc_id)
    scored = [(doc_id, bm25_score(index, query, doc_id, k1, b)) for doc_id in candidates]
    scored = [(d, s) for d, s in scored if s > 0.0]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:n]


# ---------------------------------------------------------------------------
# Ingest formats


def load_corpus_jsonl(path: str | Path) -> list[Document]:
    """Read newline-delimited document records {"id","url","title","text","dataset"}."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "id" not in rec or "text" not in rec:
                raise ValueError(f"{path}:{line_no}: record needs 'id' and 'text' fields")
            docs.append(
                Document(
                    doc_id=str(rec["id"]),
                    url=rec.get("url", "") or "",
                    title=rec.get("title", "") or "",
                    body=rec["text"],
                    dataset=rec.get("dataset", "fixture") or "fixture",
                )
            )
    return docs


def load_topics_tsv(path: str | Path) -> list[QuerySpec]:
    """Read tab-separated topics: query_id, text, narrative, expected_answer.

    The last two fields may be empty or absent.
    """
    topics = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2 or not parts[1].strip():
                raise ValueError(f"{path}:{line_no}: topic needs query_id and non-empty text")
            qid = parts[0].strip()
            if qid in seen:
                raise ValueError(f"{path}:{line_no}: duplicate query_id {qid}")
            seen.add(qid)
            topics.append(
                QuerySpec(
                    query_id=qid,
                    text=parts[1].strip(),
                    narrative=parts[2].strip() if len(parts) > 2 else "",
                    expected_answer=parts[3].strip() if len(parts) > 3 else "",
                )
            )
    return topics


# ---------------------------------------------------------------------------
# Index persistence (versioned, byte-reproducible)


def save_index(index: InvertedIndex, out_dir: str | Path) -> None:
    """Persist the index and its stored documents under out_dir.

    Serialization is fully sorted, so identical collections produce
    byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "doc_lengths": dict(sorted(index.doc_lengths.items())),
        "postings": {
            term: sorted(plist) for term, plist in sorted(index.postings.items())
        },
    }
    with open(out / "index.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    with open(out / "docs.jsonl", "w", encoding="utf-8") as fh:
        for doc_id in sorted(index.documents):
            doc = index.documents[doc_id]
            rec = {
                "id": doc.doc_id,
                "url": doc.url,
                "title": doc.title,
                "text": doc.body,
                "dataset": doc.dataset,
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def load_index(in_dir: str | Path) -> InvertedIndex:
    """Load an index previously written by save_index."""
    src = Path(in_dir)
    with open(src / "index.json", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != INDEX_FORMAT:
        raise ValueError(f"{src}: not an {INDEX_FORMAT} directory")
    if payload.get("version") != INDEX_VERSION:
        raise ValueError(f"{src}: unsupported index version {payload.get('version')}")
    postings = {
        term: [(doc_id, int(tf)) for doc_id, tf in plist]
        for term, plist in payload["postings"].items()
    }
    doc_lengths = {doc_id: int(n) for doc_id, n in payload["doc_lengths"].items()}
    documents = {}
    docs_path = src / "docs.jsonl"
    if docs_path.exists():
        for doc in load_corpus_jsonl(docs_path):
            documents[doc.doc_id] = doc
    return InvertedIndex(postings=postings, doc_lengths=doc_lengths, documents=documents)
