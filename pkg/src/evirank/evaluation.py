"""Dual-dimension retrieval evaluation and parameter grid searches.

Rankings are judged twice, once against topicality qrels and once against
credibility qrels; each base metric (AP, NDCG) is macro-averaged per
dimension and the two means are combined with a convex weight.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from .corpus import QuerySpec
from .errors import DomainError, NoLabels, OverlapError
from .evidence import Article, top_k_passages
from .fusion import RunLine, emit_run, parse_run

if TYPE_CHECKING:
    from .pipeline import SearchPipeline
    from .providers.base import EmbeddingProvider, NerProvider

logger = logging.getLogger(__name__)

DIMENSIONS = ("topicality", "credibility")
DEFAULT_CUTOFFS = (5, 10)
DEFAULT_LAMBDA = 0.5


@dataclass
class QrelSet:
    """Binary judgments for one relevance dimension."""

    dimension: str
    judgments: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise ValueError(f"unknown qrel dimension: {self.dimension}")
        for key, label in self.judgments.items():
            if label not in (0, 1):
                raise ValueError(f"qrel labels are binary; got {label} for {key}")

    def relevant(self, query_id: str) -> set[str]:
        return {
            doc_id
            for (qid, doc_id), label in self.judgments.items()
            if qid == query_id and label == 1
        }

    def query_ids(self) -> set[str]:
        return {qid for qid, _ in self.judgments}


def load_qrels(path: str | Path, dimension: str) -> QrelSet:
    """Read 4-column `qid 0 did label` qrels; a 5-column variant with the
    dimension in column 4 is also accepted and filtered."""
    judgments: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) == 4:
                qid, _, did, label = parts
            elif len(parts) == 5:
                qid, _, did, dim, label = parts
                if dim != dimension:
                    continue
            else:
                raise ValueError(f"{path}:{line_no}: expected 4 or 5 columns")
            judgments[(qid, did)] = int(label)
    return QrelSet(dimension=dimension, judgments=judgments)


def average_precision(ranking: Sequence[str], rels: set[str]) -> float:
    """Mean precision at the rank of each relevant document.

    Relevant documents missing from the ranking contribute zero; an empty
    relevance set scores zero (callers report those queries separately).
    """
    if not rels:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for position, doc_id in enumerate(ranking, start=1):
        if doc_id in rels:
            hits += 1
            precision_sum += hits / position
    return precision_sum / len(rels)


def ndcg(ranking: Sequence[str], rels: set[str], n: int) -> float:
    """Binary-gain NDCG at cutoff n with the log2(rank + 1) discount."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not rels:
        return 0.0
    dcg = 0.0
    for position, doc_id in enumerate(ranking[:n], start=1):
        if doc_id in rels:
            dcg += 1.0 / math.log2(position + 1)
    ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(n, len(rels)) + 1))
    return dcg / ideal


def cam(metric_topical: float, metric_credibility: float,
        lam: float = DEFAULT_LAMBDA) -> float:
    """Convex aggregation of the two per-dimension metric values."""
    for name, value in (("metric_topical", metric_topical),
                        ("metric_credibility", metric_credibility),
                        ("lambda", lam)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return lam * metric_topical + (1.0 - lam) * metric_credibility


@dataclass
class MetricReport:
    """Per-query and aggregate metrics for one run."""

    cutoffs: list[int]
    lam: float
    # per_query[qid][f"{metric}_{dimension}@{n}"] -> value
    per_query: dict[str, dict[str, float]]
    means: dict[str, float]
    cam_map: dict[int, float]
    cam_ndcg: dict[int, float]
    zero_relevant: dict[str, list[str]]
    skipped_queries: list[str]

    def lines(self) -> list[str]:
        """Machine-readable key-value lines."""
        out = []
        for key in sorted(self.means):
            out.append(f"{key} all {self.means[key]:.6f}")
        for n in self.cutoffs:
            out.append(f"cam_map@{n} all {self.cam_map[n]:.6f}")
            out.append(f"cam_ndcg@{n} all {self.cam_ndcg[n]:.6f}")
        for dim, qids in sorted(self.zero_relevant.items()):
            out.append(f"zero_relevant_{dim} all {len(qids)}")
        out.append(f"skipped_queries all {len(self.skipped_queries)}")
        return out


def evaluate_run(
    run_lines: Iterable[str],
    qrels_top: QrelSet,
    qrels_cred: QrelSet,
    cutoffs: Sequence[int] = DEFAULT_CUTOFFS,
    lam: float = DEFAULT_LAMBDA,
) -> MetricReport:
    """Score a run against both qrel dimensions at each cutoff.

    Metrics are computed on the run truncated to the cutoff, macro-averaged
    over queries, and the convex aggregation is applied to the means.
    Queries absent from both qrel sets are skipped with a warning count;
    queries with no relevant document in a dimension score zero there and
    are reported.
    """
    parsed: list[RunLine] = parse_run(list(run_lines))
    by_query: dict[str, list[RunLine]] = defaultdict(list)
    for entry in parsed:
        by_query[entry.query_id].append(entry)

    known = qrels_top.query_ids() | qrels_cred.query_ids()
    skipped = sorted(qid for qid in by_query if qid not in known)
    evaluated = sorted(qid for qid in by_query if qid in known)
    for qid in skipped:
        logger.warning("skipping query %s: absent from both qrel sets", qid)

    per_query: dict[str, dict[str, float]] = {}
    zero_relevant: dict[str, list[str]] = {dim: [] for dim in DIMENSIONS}
    qrels = {"topicality": qrels_top, "credibility": qrels_cred}

    for qid in evaluated:
        ranking = [e.doc_id for e in sorted(by_query[qid], key=lambda e: e.rank)]
        row: dict[str, float] = {}
        for dim in DIMENSIONS:
            rels = qrels[dim].relevant(qid)
            if not rels:
                zero_relevant[dim].append(qid)
            for n in cutoffs:
                row[f"map_{dim}@{n}"] = average_precision(ranking[:n], rels)
                row[f"ndcg_{dim}@{n}"] = ndcg(ranking, rels, n)
        per_query[qid] = row

    means: dict[str, float] = {}
    if evaluated:
        for key in next(iter(per_query.values())):
            means[key] = sum(per_query[qid][key] for qid in evaluated) / len(evaluated)
    else:
        for dim in DIMENSIONS:
            for n in cutoffs:
                means[f"map_{dim}@{n}"] = 0.0
                means[f"ndcg_{dim}@{n}"] = 0.0

    cam_map = {
        n: cam(means[f"map_topicality@{n}"], means[f"map_credibility@{n}"], lam)
        for n in cutoffs
    }
    cam_ndcg = {
        n: cam(means[f"ndcg_topicality@{n}"], means[f"ndcg_credibility@{n}"], lam)
        for n in cutoffs
    }
    return MetricReport(
        cutoffs=list(cutoffs),
        lam=lam,
        per_query=per_query,
        means=means,
        cam_map=cam_map,
        cam_ndcg=cam_ndcg,
        zero_relevant=zero_relevant,
        skipped_queries=skipped,
    )


# ---------------------------------------------------------------------------
# Parameter searches


def f1_score(retrieved: set, relevant: set) -> float:
    if not retrieved or not relevant:
        return 0.0
    true_positives = len(retrieved & relevant)
    if true_positives == 0:
        return 0.0
    precision = true_positives / len(retrieved)
    recall = true_positives / len(relevant)
    return 2 * precision * recall / (precision + recall)


def grid_search_dne(
    queries: list[QuerySpec],
    articles_by_query: dict[str, list[Article]],
    labels: dict[str, set[tuple[str, int]]],
    grid: Sequence[float],
    k: int,
    embedder: "EmbeddingProvider",
    ner: "NerProvider",
) -> tuple[float, list[tuple[float, float]]]:
    """Pick the entity-discount factor maximizing mean passage F1.

    labels maps query_id to the set of relevant (ref_id, ordinal) passages.
    Ties go to the smaller discount. Returns (best value, [(d, f1), ...]).
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    for query in queries:
        if not labels.get(query.query_id):
            raise NoLabels(f"query {query.query_id} has no labeled passages")

    table: list[tuple[float, float]] = []
    for d_ne in sorted(grid):
        f1_sum = 0.0
        for query in queries:
            hits = top_k_passages(
                query, articles_by_query[query.query_id], k, embedder, ner, d_ne=d_ne
            )
            retrieved = {(sp.passage.ref_id, sp.passage.ordinal) for sp in hits}
            f1_sum += f1_score(retrieved, labels[query.query_id])
        table.append((d_ne, f1_sum / len(queries)))

    best_d, best_f1 = table[0]
    for d_ne, score in table[1:]:
        if score > best_f1:
            best_d, best_f1 = d_ne, score
    return best_d, table


def tune_params(
    pipeline: "SearchPipeline",
    tuning_topics: list[QuerySpec],
    qrels_top: QrelSet,
    qrels_cred: QrelSet,
    k_grid: Sequence[int],
    alpha_grid: Sequence[float],
    beta_grid: Sequence[float],
    test_query_ids: Iterable[str] = (),
    cutoff: int = 10,
    lam: float = DEFAULT_LAMBDA,
) -> tuple[tuple[int, float, float], list[tuple[int, float, float, float]]]:
    """Exhaustive (k, alpha, beta) search maximizing the aggregated MAP on
    the tuning topics.

    Tuning queries must be disjoint from the held-out test queries; any
    overlap raises OverlapError. Stage 1 and 2 run once per (query, k) and
    the cheap fusion sweep reuses them. Returns the best cell and the full
    grid table [(k, alpha, beta, cam_map), ...]; ties keep the first cell
    in (k, alpha, beta) iteration order.
    """
    if not (k_grid and alpha_grid and beta_grid):
        raise ValueError("all three grids must be non-empty")
    tuning_ids = {t.query_id for t in tuning_topics}
    overlap = tuning_ids & set(test_query_ids)
    if overlap:
        raise OverlapError(f"tuning queries also in test set: {sorted(overlap)}")

    table: list[tuple[int, float, float, float]] = []
    best_cell: tuple[int, float, float] | None = None
    best_value = -1.0
    for k in k_grid:
        prepared = [pipeline.prepare(topic, k=k) for topic in tuning_topics]
        for alpha in alpha_grid:
            for beta in beta_grid:
                lines: list[str] = []
                for prep in prepared:
                    ranked = pipeline.rank_prepared(prep, alpha=alpha, beta=beta)
                    if ranked.entries:
                        lines.extend(emit_run(ranked, tag="tune"))
                report = evaluate_run(lines, qrels_top, qrels_cred,
                                      cutoffs=[cutoff], lam=lam)
                value = report.cam_map[cutoff]
                table.append((k, alpha, beta, value))
                if value > best_value:
                    best_value = value
                    best_cell = (k, alpha, beta)
    assert best_cell is not None
    return best_cell, table
