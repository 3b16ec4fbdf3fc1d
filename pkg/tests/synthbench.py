"""Synthetic misinformation benchmark: 20 queries, each with one planted
accurate document and one planted misinformation document.

The two planted documents have identical token counts and identical term
frequencies for every query term, so their BM25 scores are exactly equal
and the ascending doc_id tie break puts the misinformation document first
in a topicality-only ranking. The knowledge base carries negated evidence
("does not cure"), so the stance double separates the pair: the accurate
document agrees with the evidence, the misinformation document triggers
the negation flip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

PAIRS = [
    ("ibuprofen", "influenza"),
    ("paracetamol", "diabetes"),
    ("aspirin", "asthma"),
    ("hydroxychloroquine", "hypertension"),
    ("remdesivir", "arthritis"),
    ("ivermectin", "eczema"),
    ("dexamethasone", "migraine"),
    ("prednisone", "depression"),
    ("amoxicillin", "anxiety"),
    ("azithromycin", "insomnia"),
    ("oseltamivir", "obesity"),
    ("metformin", "measles"),
    ("insulin", "malaria"),
    ("warfarin", "tuberculosis"),
    ("heparin", "pneumonia"),
    ("omeprazole", "bronchitis"),
    ("loratadine", "gout"),
    ("melatonin", "anemia"),
    ("zinc", "psoriasis"),
    ("echinacea", "osteoporosis"),
]


@dataclass
class SynthBenchmark:
    corpus: list[dict]
    topics: list[tuple[str, str]]          # (query_id, text)
    kb_articles: list[dict]
    qrels_topicality: list[tuple[str, str, int]]
    qrels_credibility: list[tuple[str, str, int]]
    misinfo_doc: dict[str, str]            # query_id -> doc_id
    accurate_doc: dict[str, str]

    def write(self, out_dir: Path) -> dict[str, Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "corpus": out_dir / "corpus.jsonl",
            "topics": out_dir / "topics.tsv",
            "kb": out_dir / "kb_articles.jsonl",
            "qrels_top": out_dir / "qrels_topicality.txt",
            "qrels_cred": out_dir / "qrels_credibility.txt",
        }
        with open(paths["corpus"], "w", encoding="utf-8") as fh:
            for doc in self.corpus:
                fh.write(json.dumps(doc) + "\n")
        with open(paths["topics"], "w", encoding="utf-8") as fh:
            for qid, text in self.topics:
                fh.write(f"{qid}\t{text}\t\t\n")
        with open(paths["kb"], "w", encoding="utf-8") as fh:
            for article in self.kb_articles:
                fh.write(json.dumps(article) + "\n")
        for key, rows in (("qrels_top", self.qrels_topicality),
                          ("qrels_cred", self.qrels_credibility)):
            with open(paths[key], "w", encoding="utf-8") as fh:
                for qid, doc_id, label in rows:
                    fh.write(f"{qid} 0 {doc_id} {label}\n")
        return paths


def build_benchmark() -> SynthBenchmark:
    corpus: list[dict] = []
    topics: list[tuple[str, str]] = []
    kb_articles: list[dict] = []
    qrels_top: list[tuple[str, str, int]] = []
    qrels_cred: list[tuple[str, str, int]] = []
    misinfo_doc: dict[str, str] = {}
    accurate_doc: dict[str, str] = {}

    for i, (med, disease) in enumerate(PAIRS, start=1):
        qid = f"s{i:03d}"
        query = f"does {med} cure {disease}"
        topics.append((qid, query))

        kb_articles.append({
            "ref_id": f"e{i:03d}",
            "title": f"Evidence review of {med} for {disease}",
            "text": (
                f"Clinical trials show {med} does not cure {disease}. "
                f"Standard treatment for {disease} should continue regardless "
                f"of {med} supplements. "
                f"Researchers advise {disease} patients to ask a doctor before "
                f"taking {med}."
            ),
        })

        # 20 tokens each, identical tf for every query term: BM25 ties
        # exactly and doc_id breaks the tie toward the misinformation page.
        mis_id = f"d{i:03d}m"
        acc_id = f"d{i:03d}t"
        misinfo_doc[qid] = mis_id
        accurate_doc[qid] = acc_id
        corpus.append({
            "id": mis_id,
            "title": f"Secret {med} protocol",
            "text": (
                f"Amazing secret charts prove {med} does cure {disease} completely. "
                f"Thousands of readers say {med} does cure {disease} overnight "
                f"without doctors."
            ),
            "dataset": "fixture",
        })
        corpus.append({
            "id": acc_id,
            "title": f"What research says about {med} and {disease}",
            "text": (
                f"Studies show {med} does not cure {disease}. "
                f"Clinical trials found {med} does not cure {disease} and "
                f"standard treatment should continue."
            ),
            "dataset": "fixture",
        })
        corpus.append({
            "id": f"d{i:03d}x",
            "title": f"Living with {disease}",
            "text": (
                f"Living with {disease} every day takes planning. "
                f"Community members trade {disease} management tips and routines."
            ),
            "dataset": "fixture",
        })

        qrels_top += [(qid, mis_id, 1), (qid, acc_id, 1), (qid, f"d{i:03d}x", 0)]
        qrels_cred += [(qid, mis_id, 0), (qid, acc_id, 1), (qid, f"d{i:03d}x", 0)]

    return SynthBenchmark(
        corpus=corpus,
        topics=topics,
        kb_articles=kb_articles,
        qrels_topicality=qrels_top,
        qrels_credibility=qrels_cred,
        misinfo_doc=misinfo_doc,
        accurate_doc=accurate_doc,
    )
