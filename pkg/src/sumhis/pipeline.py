"""The batch stages of the summarizer, as plain functions over files.

Each ``cmd_*`` function is what the matching CLI subcommand runs; they are
usable directly from Python and return their results as well as writing them.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rouge
from .cluster import ClusterModel, aspect_words, attention_weights, filter_sentences, leading_cluster, train_cluster
from .config import PipelineConfig
from .embed import EmbeddingProvider, embed_document, embed_sentence, load_vectors, make_provider
from .errors import DimensionError, InputError
from .formats import (
    SummaryRecord,
    ingest,
    load_cluster_model,
    load_corpus,
    load_rank_model,
    read_labels,
    read_summaries,
    save_cluster_model,
    save_rank_model,
    write_labels,
    write_summaries,
)
from .oracle import ConversionStats, OracleLabel, convert_dataset
from .rank import RankModel, SentenceRanking, make_triplets, rank_sentences, train_rank
from .textproc import Document, tokenize

log = logging.getLogger(__name__)

KERNEL_CENTER = 0.45
HISTOGRAM_BINS = 50
DEFAULT_THRESHOLDS = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.6, 0.7, 0.8, 0.9)


def _check_dim(provider: EmbeddingProvider, dim: int, what: str) -> None:
    if provider.dim != dim:
        raise DimensionError(f"{what} expects dimension {dim}, embeddings have {provider.dim}")


def _labels_for(docs: Sequence[Document], labels_path) -> dict[str, OracleLabel]:
    labels = read_labels(labels_path)
    missing = [d.id for d in docs if d.gold_tokens and d.id not in labels]
    unknown = sorted(set(labels) - {d.id for d in docs})
    if missing or unknown:
        parts = []
        if missing:
            parts.append(f"corpus ids without labels: {', '.join(missing[:10])}")
        if unknown:
            parts.append(f"labels for unknown ids: {', '.join(unknown[:10])}")
        raise InputError("; ".join(parts))
    return labels


# -- oracle -----------------------------------------------------------------

def cmd_oracle(in_path, out_path, cfg: PipelineConfig = PipelineConfig()) -> ConversionStats:
    stats = ConversionStats()
    write_labels(out_path, convert_dataset(ingest(in_path), cfg.oracle_cfg, stats))
    if stats.skipped:
        log.info("skipped %d documents with empty summaries", len(stats.skipped))
    return stats


# -- ranking ----------------------------------------------------------------

def corpus_triplets(docs, labels, provider, cfg: PipelineConfig):
    triplets = []
    skipped = []
    for doc in docs:
        label = labels.get(doc.id)
        if label is None:
            continue
        made = make_triplets(doc, label.selected, provider, cfg.triplet_seed(doc.id))
        if not made:
            skipped.append(doc.id)
        triplets.extend(made)
    if skipped:
        log.info("%d documents gave no triplets (no positive or no negative sentence)", len(skipped))
    return triplets


def cmd_train_rank(in_path, labels_path, model_out, cfg: PipelineConfig = PipelineConfig()) -> RankModel:
    docs = load_corpus(in_path)
    labels = _labels_for(docs, labels_path)
    provider = make_provider(cfg.embed)
    triplets = corpus_triplets(docs, labels, provider, cfg)
    model = train_rank(triplets, cfg.rank_cfg)
    save_rank_model(model_out, model)
    return model


# -- clustering -------------------------------------------------------------

def unit(vec: np.ndarray) -> np.ndarray:
    """Scale to unit length (zero stays zero).

    Vectors entering the cluster stage are normalized: mean pooling makes the
    norm depend on sentence length, which would otherwise set how sharp the
    attention is. The cosine loss itself is scale-free in its input.
    """
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def sentence_vectors(docs, provider) -> list[np.ndarray]:
    return [unit(embed_sentence(provider, s)) for doc in docs for s in doc.sentences]


def cmd_train_cluster(in_path, model_out, cfg: PipelineConfig = PipelineConfig()) -> ClusterModel:
    docs = load_corpus(in_path)
    provider = make_provider(cfg.embed)
    vectors = sentence_vectors(docs, provider)
    if not vectors:
        raise InputError(f"{in_path}: corpus has no sentences")
    model = train_cluster(vectors, cfg.cluster_cfg)
    save_cluster_model(model_out, model)
    return model


# -- summarization ----------------------------------------------------------

@dataclass
class Selection:
    """Top-k ranking of one document plus the unit vectors the filter reads."""

    doc: Document
    ranking: SentenceRanking
    doc_vec: np.ndarray
    sent_vecs: list[np.ndarray]


def select(doc, rank_model, provider, top_k) -> Selection:
    ranking = rank_sentences(rank_model, doc, provider).top(top_k)
    return Selection(
        doc, ranking, unit(embed_document(provider, doc)),
        [unit(embed_sentence(provider, s)) for s in doc.sentences],
    )


def summarize_doc(doc, rank_model, cluster_model, provider, cfg: PipelineConfig) -> SummaryRecord:
    sel = select(doc, rank_model, provider, cfg.top_k)
    ranking = sel.ranking
    if cluster_model is not None:
        ranking = filter_sentences(cluster_model, ranking, sel.doc_vec, sel.sent_vecs, cfg.filter_cfg)
        if ranking.fallback:
            log.warning("document %s: filtering removed every sentence, kept the top one", doc.id)
    indices = tuple(sorted(ranking.indices))
    text = " ".join(doc.sentences[i].text for i in indices)
    return SummaryRecord(doc.id, text, indices, ranking.fallback)


def cmd_summarize(in_path, rank_model_path, cluster_model_path, out_path,
                  cfg: PipelineConfig = PipelineConfig()) -> list[SummaryRecord]:
    provider = make_provider(cfg.embed)
    rank_model = load_rank_model(rank_model_path)
    _check_dim(provider, rank_model.dim, "rank model")
    cluster_model = None
    if cluster_model_path is not None:
        cluster_model = load_cluster_model(cluster_model_path)
        _check_dim(provider, cluster_model.dim, "cluster model")
    records = []
    for doc in ingest(in_path):
        if not doc.sentences:
            log.warning("document %s has no sentences, skipped", doc.id)
            continue
        records.append(summarize_doc(doc, rank_model, cluster_model, provider, cfg))
    write_summaries(out_path, records)
    return records


# -- evaluation -------------------------------------------------------------

@dataclass
class EvalReport:
    means: dict[str, rouge.RougeScore]
    documents: int
    skipped: int
    missing: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def header(self) -> list[str]:
        return [f"R-{v}-{m}" for v in self.means for m in "prf"]

    def row(self) -> list[str]:
        return [f"{100 * getattr(s, attr):.2f}" for s in self.means.values()
                for attr in ("precision", "recall", "f1")]

    def table(self) -> str:
        head, row = self.header(), self.row()
        widths = [max(len(h), len(r)) for h, r in zip(head, row)]
        fmt = lambda cells: "  ".join(c.rjust(w) for c, w in zip(cells, widths))
        return fmt(head) + "\n" + fmt(row)

    def to_json(self) -> dict:
        return {
            "scores": {v: {"precision": s.precision, "recall": s.recall, "f1": s.f1} for v, s in self.means.items()},
            "documents": self.documents,
            "skipped": self.skipped,
            "missing": self.missing,
            "config": self.config,
        }


def evaluate_pairs(pairs, variants) -> dict[str, rouge.RougeScore]:
    sums = {v: np.zeros(3) for v in variants}
    for cand, ref in pairs:
        for v in variants:
            s = rouge.score(cand, ref, v)
            sums[v] += (s.precision, s.recall, s.f1)
    count = len(pairs)
    return {v: rouge.RougeScore(*(float(x) for x in (acc / count if count else acc))) for v, acc in sums.items()}


def cmd_evaluate(summaries_path, gold_path, variants=("1", "2", "L"), report_path=None,
                 config: dict | None = None) -> EvalReport:
    summaries = read_summaries(summaries_path)
    pairs = []
    skipped = 0
    missing = []
    gold_ids = set()
    for doc in ingest(gold_path):
        gold_ids.add(doc.id)
        gold = doc.gold_tokens
        if not gold:
            skipped += 1
            continue
        rec = summaries.get(doc.id)
        if rec is None:
            missing.append(doc.id)
            continue
        pairs.append((tokenize(rec.summary), gold))
    extra = sorted(set(summaries) - gold_ids)
    if extra:
        log.warning("%d summaries have no gold document: %s", len(extra), ", ".join(extra[:10]))
    if missing:
        log.warning("%d gold documents have no summary: %s", len(missing), ", ".join(missing[:10]))
    if not pairs:
        raise InputError("no summary/gold pairs to evaluate")
    report = EvalReport(evaluate_pairs(pairs, variants), len(pairs), skipped, missing, dict(config or {}))
    if report_path is not None:
        Path(report_path).write_text(json.dumps(report.to_json(), ensure_ascii=False, indent=2) + "\n", "utf-8")
    return report


# -- threshold sweep --------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    threshold: float
    tpr: float
    fpr: float
    tp: int
    fp: int
    fn: int
    tn: int


def keep_sets(selections, cluster_model, threshold) -> list[set[int]]:
    """Raw filter decisions (no top-1 fallback) for each selection."""
    out = []
    for sel in selections:
        a = leading_cluster(cluster_model, sel.doc_vec)
        out.append({i for i in sel.ranking.indices if attention_weights(cluster_model, sel.sent_vecs[i])[a] > threshold})
    return out


def sweep(selections, truths, cluster_model, thresholds) -> list[SweepRow]:
    positives = sum(len(t) for t in truths)
    total = sum(len(sel.doc.sentences) for sel in selections)
    if positives == 0:
        raise InputError("no oracle-positive sentences in the corpus")
    if positives == total:
        raise InputError("no oracle-negative sentences in the corpus")
    rows = []
    for t in thresholds:
        tp = fp = 0
        for kept, truth in zip(keep_sets(selections, cluster_model, t), truths):
            tp += len(kept & truth)
            fp += len(kept - truth)
        fn = positives - tp
        tn = total - positives - fp
        rows.append(SweepRow(t, tp / positives, fp / (total - positives), tp, fp, fn, tn))
    return rows


def cmd_sweep_threshold(in_path, labels_path, rank_model_path, cluster_model_path,
                        thresholds=DEFAULT_THRESHOLDS, out_path=None,
                        cfg: PipelineConfig = PipelineConfig()) -> list[SweepRow]:
    docs = [d for d in load_corpus(in_path) if d.sentences]
    labels = _labels_for(docs, labels_path)
    provider = make_provider(cfg.embed)
    rank_model = load_rank_model(rank_model_path)
    cluster_model = load_cluster_model(cluster_model_path)
    _check_dim(provider, rank_model.dim, "rank model")
    _check_dim(provider, cluster_model.dim, "cluster model")
    docs = [d for d in docs if d.id in labels]
    selections = [select(d, rank_model, provider, cfg.top_k) for d in docs]
    truths = [set(labels[d.id].selected) for d in docs]
    rows = sweep(selections, truths, cluster_model, sorted(thresholds))
    if out_path is not None:
        with Path(out_path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "tpr", "fpr", "tp", "fp", "fn", "tn"])
            for r in rows:
                w.writerow([repr(r.threshold), repr(r.tpr), repr(r.fpr), r.tp, r.fp, r.fn, r.tn])
    return rows


# -- distance analysis ------------------------------------------------------

def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0
    return 1.0 - float(a @ b) / (na * nb)


def kernel(x):
    return (np.asarray(x) - KERNEL_CENTER) ** 2


def histogram_rows(series: dict[str, np.ndarray], bins: int = HISTOGRAM_BINS):
    """50-bin histograms over [0, max] with one shared max per raw/kernel pair."""
    rows = []
    groups = {}
    for name, values in series.items():
        groups.setdefault(name.split("_", 1)[1], []).append(values)
    for name, values in series.items():
        pooled = np.concatenate(groups[name.split("_", 1)[1]])
        top = float(pooled.max()) if pooled.size else 0.0
        top = top if top > 0 else 1.0
        counts, edges = np.histogram(values, bins=bins, range=(0.0, top))
        rows.extend((name, float(lo), float(hi), int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], counts))
    return rows


def cmd_analyze_distances(in_path, labels_path, rank_model_path, out_path,
                          cfg: PipelineConfig = PipelineConfig()) -> dict[str, np.ndarray]:
    docs = load_corpus(in_path)
    labels = _labels_for(docs, labels_path)
    provider = make_provider(cfg.embed)
    model = load_rank_model(rank_model_path)
    _check_dim(provider, model.dim, "rank model")
    pos, neg = [], []
    for t in corpus_triplets(docs, labels, provider, cfg):
        text = model.project(t.text_vec)
        pos.append(cosine_distance(text, model.project(t.pos_vec)))
        neg.append(cosine_distance(text, model.project(t.neg_vec)))
    pos, neg = np.asarray(pos), np.asarray(neg)
    series = {"pos_raw": pos, "neg_raw": neg, "pos_kernel": kernel(pos), "neg_kernel": kernel(neg)}
    with Path(out_path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "bin_lo", "bin_hi", "count"])
        for name, lo, hi, count in histogram_rows(series):
            w.writerow([name, repr(lo), repr(hi), count])
    return series


# -- aspect words -----------------------------------------------------------

def cmd_aspects(cluster_model_path, vectors_path, top_m: int = 7) -> list[str]:
    model = load_cluster_model(cluster_model_path)
    provider = load_vectors(vectors_path)
    _check_dim(provider, model.dim, "cluster model")
    words = aspect_words(model, sorted(provider.table.items()), top_m)
    return [f"{j}: {', '.join(ws)}" for j, ws in enumerate(words)]
