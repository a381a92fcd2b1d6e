"""Hidden-structure discovery: a K x n matrix of cluster embeddings trained to
reconstruct input vectors through softmax attention, and the leading-cluster
filter applied to ranked sentences."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, InputError, TrainingError
from .rank import SentenceRanking

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterTrainConfig:
    clusters: int = 8
    epochs: int = 2
    learning_rate: float = 0.05
    seed: int = 0
    init: Literal["random", "kmeans"] = "random"
    ortho_weight: float = 0.0

    def __post_init__(self):
        if self.clusters < 1:
            raise ConfigError(f"cluster count must be >= 1, got {self.clusters}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not self.ortho_weight >= 0:
            raise ConfigError(f"ortho_weight must be >= 0, got {self.ortho_weight}")
        if self.init not in ("random", "kmeans"):
            raise ConfigError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class FilterConfig:
    threshold: float = 0.25

    def __post_init__(self):
        if not 0 <= self.threshold < 1:
            raise ConfigError(f"threshold must lie in [0, 1), got {self.threshold}")


@dataclass
class ClusterModel:
    C: np.ndarray
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=np.float64)
        if self.C.ndim != 2:
            raise DimensionError(f"cluster matrix must be K x n, got shape {self.C.shape}")
        if not np.all(np.isfinite(self.C)):
            raise TrainingError("cluster matrix has non-finite entries")

    @property
    def K(self) -> int:
        return self.C.shape[0]

    @property
    def dim(self) -> int:
        return self.C.shape[1]


def _check_dim(model: ClusterModel, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (model.dim,):
        raise DimensionError(f"vector shape {q.shape} does not match cluster dimension {model.dim}")
    return q


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def attention_weights(model: ClusterModel, q: np.ndarray) -> np.ndarray:
    return _softmax(model.C @ _check_dim(model, q))


def reconstruct(model: ClusterModel, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (model.K,):
        raise DimensionError(f"weight vector has shape {p.shape}, expected ({model.K},)")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"attention weights must sum to 1, got {p.sum()!r}")
    return p @ model.C


def _cosine_loss(q: np.ndarray, o: np.ndarray) -> float:
    denom = np.linalg.norm(q) * np.linalg.norm(o)
    if denom == 0:
        return 1.0
    cos = float(q @ o) / denom
    return 1.0 - min(1.0, max(-1.0, cos))


def cluster_loss(model: ClusterModel, q: np.ndarray) -> float:
    """Cosine distance between ``q`` and its attention reconstruction.

    A zero reconstruction counts as maximally dissimilar (loss 1).
    """
    q = _check_dim(model, q)
    if not np.any(q):
        raise ValueError("cannot score a zero vector")
    return _cosine_loss(q, reconstruct(model, attention_weights(model, q)))


def cluster_loss_grad(model: ClusterModel, q: np.ndarray) -> np.ndarray:
    """Analytic gradient of :func:`cluster_loss` w.r.t. the cluster matrix."""
    q = _check_dim(model, q)
    C = model.C
    p = attention_weights(model, q)
    o = p @ C
    q_norm, o_norm = np.linalg.norm(q), np.linalg.norm(o)
    if o_norm == 0:
        return np.zeros_like(C)
    cos = float(q @ o) / (q_norm * o_norm)
    g_o = -(q / (q_norm * o_norm) - cos * o / o_norm**2)
    # o = p^T C: direct term plus the path through the softmax scores z = C q
    g_p = C @ g_o
    g_z = p * (g_p - p @ g_p)
    return np.outer(p, g_o) + np.outer(g_z, q)


def _unit_rows(C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(C, axis=1)
    if np.any(norms == 0):
        raise ValueError("cluster matrix has an all-zero row")
    return C / norms[:, None], norms


def ortho_reg(model: ClusterModel) -> float:
    """Squared Frobenius norm of ``U U^T - I`` for the row-normalized matrix ``U``."""
    U, _ = _unit_rows(model.C)
    G = U @ U.T - np.eye(model.K)
    return float(np.sum(G * G))


def ortho_reg_grad(model: ClusterModel) -> np.ndarray:
    U, norms = _unit_rows(model.C)
    G = U @ U.T - np.eye(model.K)
    g_u = 4.0 * G @ U
    # back through row normalization: (I - u u^T) g / |c|
    radial = np.sum(g_u * U, axis=1)
    return (g_u - radial[:, None] * U) / norms[:, None]


def leading_weight(model: ClusterModel, q: np.ndarray, a: int) -> float:
    if not 0 <= a < model.K:
        raise IndexError(f"cluster index {a} out of range for K={model.K}")
    return float(attention_weights(model, q)[a])


def leading_cluster(model: ClusterModel, q: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the smallest index
    return int(np.argmax(attention_weights(model, q)))


def kmeans_init(
    vectors: Sequence[np.ndarray], K: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6
) -> np.ndarray:
    """Lloyd's algorithm; returns the K centroids as rows.

    Initial centers are K distinct input points drawn uniformly without
    replacement. An emptied cluster is re-seeded with the point farthest from
    its current center. Stops after ``max_iter`` rounds or when the largest
    center shift falls below ``tol`` relative to the largest center norm.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise InputError("k-means needs a non-empty list of vectors")
    distinct = np.unique(X, axis=0)
    if len(distinct) < K:
        raise InputError(f"k-means needs at least {K} distinct vectors, got {len(distinct)}")
    rng = np.random.default_rng(seed)
    # sample among distinct points so that no two starting centers coincide
    order = np.lexsort(distinct.T[::-1])
    centers = distinct[order][np.sort(rng.choice(len(distinct), size=K, replace=False))].copy()
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        new = centers.copy()
        for j in range(K):
            members = X[assign == j]
            if len(members):
                new[j] = members.mean(axis=0)
            else:
                far = int(d2[np.arange(len(X)), assign].argmax())
                new[j] = X[far]
                assign[far] = j
        shift = np.linalg.norm(new - centers, axis=1).max()
        scale = max(np.linalg.norm(new, axis=1).max(), 1e-12)
        centers = new
        if shift / scale < tol:
            break
    return centers


def train_cluster(
    vectors: Iterable[np.ndarray],
    cfg: ClusterTrainConfig = ClusterTrainConfig(),
    init_vectors: Sequence[np.ndarray] | None = None,
) -> ClusterModel:
    """SGD on cosine reconstruction loss (+ ``ortho_weight`` x orthogonality penalty).

    Zero vectors are skipped. ``init_vectors`` feeds k-means initialization and
    defaults to the training vectors. ``model.history`` holds per-epoch mean
    loss, each term taken just before its update.
    """
    data = []
    zeros = 0
    for v in vectors:
        v = np.asarray(v, dtype=np.float64)
        if np.any(v):
            data.append(v)
        else:
            zeros += 1
    if zeros:
        log.info("skipped %d zero vectors", zeros)
    if not data:
        raise TrainingError("no non-zero training vectors")
    dim = data[0].shape[0]
    if any(v.shape != (dim,) for v in data):
        raise DimensionError("training vectors differ in dimension")
    if cfg.init == "kmeans":
        C = kmeans_init(data if init_vectors is None else init_vectors, cfg.clusters, cfg.seed)
    else:
        C = np.random.default_rng(cfg.seed).uniform(-0.1, 0.1, size=(cfg.clusters, dim))
    model = ClusterModel(C)
    rng = np.random.default_rng([cfg.seed, 1])
    for epoch in range(cfg.epochs):
        total = 0.0
        for k in rng.permutation(len(data)):
            q = data[k]
            loss = cluster_loss(model, q)
            grad = cluster_loss_grad(model, q)
            if cfg.ortho_weight > 0:
                loss += cfg.ortho_weight * ortho_reg(model)
                grad = grad + cfg.ortho_weight * ortho_reg_grad(model)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch + 1}, vector {k}")
            total += loss
            model.C -= cfg.learning_rate * grad
        if not np.all(np.isfinite(model.C)):
            raise TrainingError(f"cluster matrix diverged during epoch {epoch + 1}")
        model.history.append(float(total / len(data)))
        log.info("cluster epoch %d: mean loss %.6f", epoch + 1, model.history[-1])
    if np.any(~model.C.any(axis=1)):
        raise TrainingError("training produced an all-zero cluster row")
    return model


def filter_sentences(
    model: ClusterModel,
    ranking: SentenceRanking,
    doc_vec: np.ndarray,
    sentence_vecs: Mapping[int, np.ndarray] | Sequence[np.ndarray],
    cfg: FilterConfig = FilterConfig(),
    fallback: bool = True,
) -> SentenceRanking:
    """Drop sentences whose weight on the document's leading cluster is <= threshold.

    Order is preserved. If every sentence is dropped and ``fallback`` is set,
    the top-ranked sentence is kept and the result is flagged.
    """
    a = leading_cluster(model, doc_vec)
    kept = tuple(
        (i, s) for i, s in ranking.ordered
        if attention_weights(model, sentence_vecs[i])[a] > cfg.threshold
    )
    if not kept and ranking.ordered and fallback:
        return SentenceRanking(ranking.doc_id, ranking.ordered[:1], fallback=True)
    return SentenceRanking(ranking.doc_id, kept, ranking.fallback)


def aspect_words(
    model: ClusterModel, vocab: Sequence[tuple[str, np.ndarray]], top_m: int = 7
) -> list[list[str]]:
    """Top ``top_m`` tokens per cluster by cosine similarity to the cluster row."""
    if not vocab:
        raise InputError("vocabulary is empty")
    tokens = [t for t, _ in vocab]
    V = np.asarray([v for _, v in vocab], dtype=np.float64)
    if V.shape[1] != model.dim:
        raise DimensionError(f"vocabulary dimension {V.shape[1]} != cluster dimension {model.dim}")
    v_norm = np.linalg.norm(V, axis=1)
    v_norm[v_norm == 0] = 1.0
    c_norm = np.linalg.norm(model.C, axis=1)
    c_norm[c_norm == 0] = 1.0
    cos = (model.C / c_norm[:, None]) @ (V / v_norm[:, None]).T
    result = []
    for row in cos:
        order = sorted(range(len(tokens)), key=lambda i: (-row[i], tokens[i]))
        result.append([tokens[i] for i in order[:top_m]])
    return result


def assignment_purity(assignments: Sequence[int], truth: Sequence[int]) -> float:
    """Fraction of items whose cluster's majority true class matches their own."""
    assignments = np.asarray(assignments)
    truth = np.asarray(truth)
    hits = 0
    for c in np.unique(assignments):
        _, counts = np.unique(truth[assignments == c], return_counts=True)
        hits += counts.max()
    return hits / len(truth)
