"""Command-line front end: indexing, single queries, batch runs,
evaluation, parameter tuning and serving.

Exit codes: 0 success, 2 usage error, 3 empty corpus, 4 provider or
knowledge-base failure, 5 tuning/test overlap, 6 malformed input data,
1 anything unexpected.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, fusion
from .config import EngineConfig, load_config
from .errors import (
    EmptyCollection,
    EviRankError,
    KnowledgeBaseUnavailable,
    MalformedRun,
    OverlapError,
    ProviderFailure,
)
from .pipeline import PipelineStageError, SearchPipeline, batch_run
from .providers import build_provider_set

EXIT_EMPTY_COLLECTION = 3
EXIT_PROVIDER = 4
EXIT_OVERLAP = 5
EXIT_DATA = 6


def _load_engine(args) -> tuple[SearchPipeline, EngineConfig]:
    config = load_config(args.config) if getattr(args, "config", None) else load_config()
    index_dir = getattr(args, "index", None) or config.index_dir
    if not index_dir:
        raise SystemExit("an index directory is required (--index or config index_dir)")
    index = corpus_mod.load_index(index_dir)
    providers = build_provider_set(config.providers,
                                   kb_fixture_path=config.kb_fixture_path or None)
    return SearchPipeline(index, providers, config), config


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def cmd_index(args) -> int:
    docs = corpus_mod.load_corpus_jsonl(args.corpus)
    index = corpus_mod.build_index(docs)
    corpus_mod.save_index(index, args.out)
    skipped = len(docs) - index.doc_count
    print(f"indexed {index.doc_count} documents into {args.out}"
          + (f" ({skipped} skipped: empty after normalization)" if skipped else ""))
    return 0


def cmd_search(args) -> int:
    pipeline, config = _load_engine(args)
    query = corpus_mod.QuerySpec(query_id="cli", text=args.q)
    result = pipeline.search(query, k=args.k, alpha=args.alpha, beta=args.beta,
                             top_n=args.top)
    ranked = result.ranked
    params = ranked.params
    print(f"query: {args.q}")
    print(f"params: k={params['k']} alpha={params['alpha']} beta={params['beta']} "
          f"d_ne={params['d_ne']}")
    for warning in result.prepared.warnings:
        print(f"warning: {warning}")
    print()
    header = f"{'rank':>4}  {'doc_id':<16} {'rsv':>8} {'t_norm':>8} {'f':>8} " \
             f"{'stance':>8} {'sim':>8}  title"
    print(header)
    for position, doc in enumerate(ranked.entries, 1):
        stored = pipeline.index.documents.get(doc.doc_id)
        title = (stored.title if stored else "")[:48]
        stance = "-" if doc.factual.stance is None else f"{doc.factual.stance:.4f}"
        sim = "-" if doc.factual.similarity is None else f"{doc.factual.similarity:.4f}"
        flag = " [degraded]" if doc.degraded else ""
        print(f"{position:>4}  {doc.doc_id:<16} {doc.rsv:>8.4f} {doc.t_norm:>8.4f} "
              f"{doc.factual.f:>8.4f} {stance:>8} {sim:>8}  {title}{flag}")
    text = ranked.gentext
    print()
    if text is None:
        print("gentext: none (no evidence retrieved)")
    else:
        print(f"gentext ({text.origin}, {text.word_count} words):")
        for sentence in text.sentences:
            marker = "" if sentence.valid else " [unresolved citations]"
            refs = ", ".join(sorted(sentence.citations))
            print(f"  - {sentence.text} [{refs}]{marker}")
    return 0


def cmd_run(args) -> int:
    pipeline, _ = _load_engine(args)
    topics = corpus_mod.load_topics_tsv(args.topics)
    lines = batch_run(pipeline, topics, tag=args.tag, k=args.k,
                      alpha=args.alpha, beta=args.beta)
    Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""),
                              encoding="utf-8")
    print(f"wrote {len(lines)} run lines for {len(topics)} topics to {args.out}")
    return 0


def cmd_eval(args) -> int:
    run_lines = Path(args.run).read_text(encoding="utf-8").splitlines()
    qrels_top = evaluation.load_qrels(args.qrels_top, "topicality")
    qrels_cred = evaluation.load_qrels(args.qrels_cred, "credibility")
    cutoffs = _int_list(args.cutoffs)
    report = evaluation.evaluate_run(run_lines, qrels_top, qrels_cred,
                                     cutoffs=cutoffs, lam=getattr(args, "lambda"))
    print(f"{'metric':<18}" + "".join(f"{'@' + str(n):>10}" for n in cutoffs))
    for metric in ("map_topicality", "map_credibility", "ndcg_topicality",
                   "ndcg_credibility"):
        cells = "".join(f"{report.means[f'{metric}@{n}']:>10.4f}" for n in cutoffs)
        print(f"{metric:<18}{cells}")
    for name, values in (("cam_map", report.cam_map), ("cam_ndcg", report.cam_ndcg)):
        cells = "".join(f"{values[n]:>10.4f}" for n in cutoffs)
        print(f"{name:<18}{cells}")
    print()
    for line in report.lines():
        print(line)
    if args.per_query:
        for qid in sorted(report.per_query):
            for key in sorted(report.per_query[qid]):
                print(f"{key} {qid} {report.per_query[qid][key]:.6f}")
    return 0


def cmd_tune(args) -> int:
    pipeline, config = _load_engine(args)
    topics = corpus_mod.load_topics_tsv(args.topics)
    qrels_top = evaluation.load_qrels(args.qrels_top, "topicality")
    qrels_cred = evaluation.load_qrels(args.qrels_cred, "credibility")
    test_ids: list[str] = []
    if args.test_topics:
        test_ids = [t.query_id for t in corpus_mod.load_topics_tsv(args.test_topics)]
    best, table = evaluation.tune_params(
        pipeline, topics, qrels_top, qrels_cred,
        k_grid=_int_list(args.grid_k),
        alpha_grid=_float_list(args.grid_alpha),
        beta_grid=_float_list(args.grid_beta),
        test_query_ids=test_ids,
        cutoff=args.cutoff,
        lam=config.lam,
    )
    header = f"{'k':>4} {'alpha':>6} {'beta':>6} {'cam_map@' + str(args.cutoff):>12}"
    rows = [header] + [
        f"{k:>4} {alpha:>6.2f} {beta:>6.2f} {value:>12.6f}"
        for k, alpha, beta, value in table
    ]
    output = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
        print(f"wrote grid table ({len(table)} cells) to {args.out}")
    else:
        print(output, end="")
    print(f"best: k={best[0]} alpha={best[1]} beta={best[2]}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config) if args.config else load_config()
    pipeline = None
    index_dir = args.index or config.index_dir
    if index_dir and Path(index_dir).exists():
        index = corpus_mod.load_index(index_dir)
        providers = build_provider_set(config.providers,
                                       kb_fixture_path=config.kb_fixture_path or None)
        pipeline = SearchPipeline(index, providers, config)
    else:
        print(f"warning: no index at {index_dir!r}; /api/search will return 503",
              file=sys.stderr)
    app = create_app(pipeline, config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evirank",
        description="Evidence-grounded health search: index, search, run, "
                    "evaluate, tune, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist an inverted index")
    p.add_argument("--corpus", required=True, help="JSONL corpus file")
    p.add_argument("--out", required=True, help="output index directory")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="run one query with a score breakdown")
    p.add_argument("--q", required=True, help="query text")
    p.add_argument("--index", help="index directory")
    p.add_argument("--config", help="config file")
    p.add_argument("--k", type=int, help="evidence passages to retrieve")
    p.add_argument("--alpha", type=float, help="stance weight inside F")
    p.add_argument("--beta", type=float, help="topicality weight inside RSV")
    p.add_argument("--top", type=int, default=10, help="results to show")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("run", help="batch run over a topics file")
    p.add_argument("--topics", required=True, help="TSV topics file")
    p.add_argument("--out", required=True, help="output run file")
    p.add_argument("--index", help="index directory")
    p.add_argument("--config", help="config file")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--tag", default="evirank", help="run tag")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="evaluate a run against dual qrels")
    p.add_argument("--run", required=True, help="run file")
    p.add_argument("--qrels-top", required=True, help="topicality qrels")
    p.add_argument("--qrels-cred", required=True, help="credibility qrels")
    p.add_argument("--cutoffs", default="5,10", help="comma-separated cutoffs")
    p.add_argument("--lambda", type=float, default=0.5, dest="lambda",
                   help="weight of the topical dimension")
    p.add_argument("--per-query", action="store_true", help="print per-query rows")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("tune", help="grid search k, alpha, beta on tuning topics")
    p.add_argument("--topics", required=True, help="tuning topics TSV")
    p.add_argument("--qrels-top", required=True)
    p.add_argument("--qrels-cred", required=True)
    p.add_argument("--index", help="index directory")
    p.add_argument("--config", help="config file")
    default_steps = ",".join(f"{i * 0.05:.2f}" for i in range(21))
    p.add_argument("--grid-k", default="5,10,15,20")
    p.add_argument("--grid-alpha", default=default_steps,
                   help="default 0..1 in 0.05 steps")
    p.add_argument("--grid-beta", default=default_steps,
                   help="default 0..1 in 0.05 steps")
    p.add_argument("--test-topics", help="held-out topics TSV (overlap check)")
    p.add_argument("--cutoff", type=int, default=10)
    p.add_argument("--out", help="write the grid table here")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("serve", help="start the HTTP search service")
    p.add_argument("--config", help="config file")
    p.add_argument("--index", help="index directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyCollection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_COLLECTION
    except OverlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except (PipelineStageError, ProviderFailure, KnowledgeBaseUnavailable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (MalformedRun, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EviRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
