"""Stage 3b: normalize topicality, fuse it with factual accuracy into the
retrieval status value, and emit deterministic rankings and run files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import DomainError, DuplicateDocument, MalformedRun
from .factuality import FactualScore
from .gentext import GenText

DEFAULT_BETA = 0.45
DEFAULT_CANDIDATE_POOL = 100


@dataclass(frozen=True)
class ScoredDoc:
    """Full per-document score breakdown entering the final ranking."""

    doc_id: str
    t_raw: float
    t_norm: float
    factual: FactualScore
    rsv: float
    degraded: bool = False


@dataclass
class RankedList:
    """Final ranking for one query, sorted by rsv descending then doc_id."""

    query_id: str
    entries: list[ScoredDoc]
    gentext: GenText | None
    params: dict[str, float] = field(default_factory=dict)


def normalize_topicality(scores: list[tuple[str, float]]) -> list[tuple[str, float]]:
    """Per-query min-max normalization of raw BM25 scores.

    When all scores are equal every document gets 1.0, letting factual
    accuracy fully decide the ranking.
    """
    if not scores:
        raise ValueError("cannot normalize an empty score list")
    values = [t for _, t in scores]
    lo, hi = min(values), max(values)
    if hi == lo:
        return [(doc_id, 1.0) for doc_id, _ in scores]
    return [(doc_id, (t - lo) / (hi - lo)) for doc_id, t in scores]


def fuse(t_norm: float, f: float, beta: float) -> float:
    """Retrieval status value: beta * t_norm + (1 - beta) * f."""
    for name, value in (("t_norm", t_norm), ("f", f), ("beta", beta)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return beta * t_norm + (1.0 - beta) * f


def rank(
    query_id: str,
    scored: list[ScoredDoc],
    gentext: GenText | None,
    params: dict[str, float] | None = None,
) -> RankedList:
    """Sort scored documents into the final ranking (ties by doc_id)."""
    seen = set()
    for doc in scored:
        if doc.doc_id in seen:
            raise DuplicateDocument(doc.doc_id)
        seen.add(doc.doc_id)
    entries = sorted(scored, key=lambda d: (-d.rsv, d.doc_id))
    return RankedList(query_id=query_id, entries=entries, gentext=gentext,
                      params=dict(params or {}))


def emit_run(ranked: RankedList, tag: str) -> list[str]:
    """Standard interchange lines: query_id Q0 doc_id rank score tag."""
    if not ranked.entries:
        raise ValueError("cannot emit a run for an empty ranking")
    lines = []
    for position, doc in enumerate(ranked.entries, start=1):
        lines.append(f"{ranked.query_id} Q0 {doc.doc_id} {position} {doc.rsv:.6f} {tag}")
    return lines


class RunLine(NamedTuple):
    query_id: str
    doc_id: str
    rank: int
    score: float
    tag: str


def parse_run(lines: list[str]) -> list[RunLine]:
    """Parse run-file lines back into their fields (inverse of emit_run)."""
    out = []
    for line_no, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6 or parts[1] != "Q0":
            raise MalformedRun(f"line {line_no}: expected 'qid Q0 docid rank score tag'")
        try:
            position = int(parts[3])
            score = float(parts[4])
        except ValueError as exc:
            raise MalformedRun(f"line {line_no}: {exc}") from exc
        out.append(RunLine(query_id=parts[0], doc_id=parts[2], rank=position,
                           score=score, tag=parts[5]))
    return out
