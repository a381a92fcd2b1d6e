"""Sentence ranking: a linear projection over frozen embeddings trained with
the pairwise softmax (triplet) objective."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .embed import EmbeddingProvider, embed_document, embed_sentence
from .errors import ConfigError, DimensionError, InputError, TrainingError
from .textproc import Document

log = logging.getLogger(__name__)

TRIPLET_CAP = 16


@dataclass(frozen=True)
class RankTrainConfig:
    learning_rate: float = 0.01
    epochs: int = 5
    seed: int = 0
    loss_kind: Literal["triplet_nll", "binary_ce"] = "triplet_nll"
    init_scale: float = 0.1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.loss_kind not in ("triplet_nll", "binary_ce"):
            raise ConfigError(f"unknown loss kind {self.loss_kind!r}")
        if not self.init_scale > 0:
            raise ConfigError(f"init_scale must be > 0, got {self.init_scale}")


@dataclass(frozen=True)
class Triplet:
    """A document vector with one positive and one negative sentence vector.

    ``swapped`` records the slot order the pair was presented in; the roles
    themselves are always carried by ``pos_vec``/``neg_vec``.
    """

    text_vec: np.ndarray
    pos_vec: np.ndarray
    neg_vec: np.ndarray
    swapped: bool = False

    def __post_init__(self):
        dims = {self.text_vec.shape, self.pos_vec.shape, self.neg_vec.shape}
        if len(dims) != 1:
            raise DimensionError(f"triplet vectors disagree in shape: {sorted(dims)}")

    @property
    def slots(self) -> tuple[np.ndarray, np.ndarray]:
        if self.swapped:
            return self.neg_vec, self.pos_vec
        return self.pos_vec, self.neg_vec


@dataclass
class RankModel:
    W: np.ndarray
    config: RankTrainConfig = field(default_factory=RankTrainConfig)
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        if self.W.ndim != 2 or self.W.shape[0] > self.W.shape[1]:
            raise DimensionError(f"projection must be d x n with d <= n, got {self.W.shape}")
        if not np.all(np.isfinite(self.W)):
            raise TrainingError("projection has non-finite entries")

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def project(self, vecs: np.ndarray) -> np.ndarray:
        vecs = np.asarray(vecs, dtype=np.float64)
        if vecs.shape[-1] != self.dim:
            raise DimensionError(f"vector dimension {vecs.shape[-1]} != model dimension {self.dim}")
        return vecs @ self.W.T


@dataclass(frozen=True)
class SentenceRanking:
    doc_id: str
    ordered: tuple[tuple[int, float], ...]
    fallback: bool = False

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.ordered]

    def top(self, k: int) -> "SentenceRanking":
        return SentenceRanking(self.doc_id, self.ordered[:k], self.fallback)


def sim(model: RankModel, a: np.ndarray, b: np.ndarray) -> float:
    """Dot product in the projected space: ``(W a) . (W b)``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"vector shapes differ: {a.shape} vs {b.shape}")
    return float(model.project(a) @ model.project(b))


def _softplus(x: float) -> float:
    # log(1 + e^x) without overflow
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _sim_grad(W: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # d(a^T W^T W b)/dW = W (a b^T + b a^T)
    return np.outer(W @ a, b) + np.outer(W @ b, a)


def rank_loss(model: RankModel, t: Triplet) -> float:
    """Negative log-likelihood of picking the positive over the negative."""
    s_pos = sim(model, t.text_vec, t.pos_vec)
    s_neg = sim(model, t.text_vec, t.neg_vec)
    return _softplus(s_neg - s_pos)


def rank_loss_grad(model: RankModel, t: Triplet) -> np.ndarray:
    W = model.W
    s_pos = sim(model, t.text_vec, t.pos_vec)
    s_neg = sim(model, t.text_vec, t.neg_vec)
    weight = _sigmoid(s_neg - s_pos)
    return weight * (_sim_grad(W, t.text_vec, t.neg_vec) - _sim_grad(W, t.text_vec, t.pos_vec))


def binary_loss(model: RankModel, t: Triplet) -> float:
    """Binary cross-entropy on (text, pos, 1) and (text, neg, 0) with logistic(sim)."""
    s_pos = sim(model, t.text_vec, t.pos_vec)
    s_neg = sim(model, t.text_vec, t.neg_vec)
    return _softplus(-s_pos) + _softplus(s_neg)


def binary_loss_grad(model: RankModel, t: Triplet) -> np.ndarray:
    W = model.W
    s_pos = sim(model, t.text_vec, t.pos_vec)
    s_neg = sim(model, t.text_vec, t.neg_vec)
    return (_sigmoid(s_neg) * _sim_grad(W, t.text_vec, t.neg_vec)
            - _sigmoid(-s_pos) * _sim_grad(W, t.text_vec, t.pos_vec))


LOSSES = {
    "triplet_nll": (rank_loss, rank_loss_grad),
    "binary_ce": (binary_loss, binary_loss_grad),
}


def make_triplets(
    doc: Document,
    selected: Iterable[int],
    provider: EmbeddingProvider,
    seed: int = 0,
    cap: int = TRIPLET_CAP,
) -> list[Triplet]:
    """Pair every selected sentence with every unselected one.

    When the product exceeds ``cap`` a seeded uniform sample of ``cap`` pairs is
    kept (in pair order). Each record's slot order is randomized. Returns an
    empty list when the document has no positive or no negative sentence.
    """
    chosen = set(selected)
    count = len(doc.sentences)
    if any(i < 0 or i >= count for i in chosen):
        raise InputError(f"document {doc.id!r}: label indices out of range")
    pos = [i for i in range(count) if i in chosen]
    neg = [i for i in range(count) if i not in chosen]
    if not pos or not neg:
        return []
    rng = np.random.default_rng(seed)
    pairs = list(itertools.product(pos, neg))
    if len(pairs) > cap:
        keep = np.sort(rng.choice(len(pairs), size=cap, replace=False))
        pairs = [pairs[k] for k in keep]
    text_vec = embed_document(provider, doc)
    sent_vecs = {i: embed_sentence(provider, doc.sentences[i]) for i in {i for pair in pairs for i in pair}}
    swaps = rng.random(len(pairs)) < 0.5
    return [
        Triplet(text_vec, sent_vecs[p], sent_vecs[n], bool(swap))
        for (p, n), swap in zip(pairs, swaps)
    ]


def init_projection(dim: int, cfg: RankTrainConfig) -> np.ndarray:
    rng = np.random.default_rng(cfg.seed)
    noise = rng.uniform(-cfg.init_scale / 10, cfg.init_scale / 10, size=(dim, dim))
    return cfg.init_scale * np.eye(dim) + noise


def mean_loss(model: RankModel, triplets: Sequence[Triplet]) -> float:
    loss_fn, _ = LOSSES[model.config.loss_kind]
    return float(np.mean([loss_fn(model, t) for t in triplets]))


def train_rank(triplets: Iterable[Triplet], cfg: RankTrainConfig = RankTrainConfig()) -> RankModel:
    """Plain SGD, one triplet per step, order reshuffled every epoch.

    ``model.history`` holds the mean per-step loss of each epoch (each loss is
    taken just before its update).
    """
    data = list(triplets)
    if not data:
        raise TrainingError("no training triplets")
    dim = data[0].text_vec.shape[0]
    loss_fn, grad_fn = LOSSES[cfg.loss_kind]
    model = RankModel(init_projection(dim, cfg), cfg)
    # the shuffle stream is separate from the initialization stream
    rng = np.random.default_rng([cfg.seed, 1])
    for epoch in range(cfg.epochs):
        total = 0.0
        for k in rng.permutation(len(data)):
            t = data[k]
            loss = loss_fn(model, t)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch + 1}, triplet {k}")
            total += loss
            model.W -= cfg.learning_rate * grad_fn(model, t)
        if not np.all(np.isfinite(model.W)):
            raise TrainingError(f"projection diverged during epoch {epoch + 1}")
        model.history.append(float(total / len(data)))
        log.info("rank epoch %d: mean loss %.6f", epoch + 1, model.history[-1])
    return model


def rank_sentences(model: RankModel, doc: Document, provider: EmbeddingProvider) -> SentenceRanking:
    """Order sentences by similarity to the whole document, best first.

    With a fixed negative the triplet loss is strictly decreasing in the
    positive's similarity, so ranking by similarity gives the same order as
    ranking by loss against a fixed last-sentence negative.
    """
    if not doc.sentences:
        raise InputError(f"document {doc.id!r} has no sentences")
    doc_proj = model.project(embed_document(provider, doc))
    sent_proj = model.project(np.stack([embed_sentence(provider, s) for s in doc.sentences]))
    scores = sent_proj @ doc_proj
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return SentenceRanking(doc.id, tuple((i, float(scores[i])) for i in order))
