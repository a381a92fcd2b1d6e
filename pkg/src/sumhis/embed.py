"""Frozen token embeddings and mean-pooled sentence/document vectors."""

from __future__ import annotations

import hashlib
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, FormatError, InputError
from .textproc import Document, Sentence

WORDVEC_MAGIC = "WORDVEC"
WORDVEC_VERSION = "v1"


def stable_hash64(*parts: object) -> int:
    """64-bit BLAKE2b digest of the ``\\x1f``-joined string forms of ``parts``."""
    data = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def derive_seed(seed: int, *names: object) -> int:
    """Named sub-seed, so that each pipeline stage is reproducible on its own."""
    return stable_hash64("seed", seed, *names)


def hashed_embed(token: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit vector for ``token``.

    The 64-bit hash of ``(seed, token)`` seeds a PCG64 generator which draws
    ``dim`` values uniform in [-1, 1]; the result is scaled to unit norm.
    """
    if dim < 2:
        raise DimensionError(f"embedding dimension must be >= 2, got {dim}")
    rng = np.random.Generator(np.random.PCG64(stable_hash64(seed, token)))
    vec = rng.uniform(-1.0, 1.0, size=dim)
    return vec / np.linalg.norm(vec)


class EmbeddingProvider:
    """Maps tokens to vectors of a fixed dimension; ``None`` for a miss."""

    dim: int

    def vector(self, token: str) -> np.ndarray | None:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


class HashedProvider(EmbeddingProvider):
    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 2:
            raise DimensionError(f"embedding dimension must be >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self._cached = lru_cache(maxsize=1 << 16)(self._compute)

    def _compute(self, token: str) -> np.ndarray:
        vec = hashed_embed(token, self.dim, self.seed)
        vec.flags.writeable = False
        return vec

    def vector(self, token: str) -> np.ndarray:
        return self._cached(token)

    def spec(self) -> str:
        return f"hashed:{self.dim}:{self.seed}"


class LookupProvider(EmbeddingProvider):
    def __init__(self, table: Mapping[str, np.ndarray], dim: int, source: str = ""):
        if dim < 2:
            raise DimensionError(f"embedding dimension must be >= 2, got {dim}")
        self.dim = dim
        self.table = {}
        for token, vec in table.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise DimensionError(f"vector for {token!r} has shape {vec.shape}, expected ({dim},)")
            vec.flags.writeable = False
            self.table[token] = vec
        self.source = source

    def vector(self, token: str) -> np.ndarray | None:
        return self.table.get(token)

    def spec(self) -> str:
        return f"vectors:{self.source}"

    def __len__(self):
        return len(self.table)


def _mean(provider: EmbeddingProvider, tokens: Iterable[str]) -> np.ndarray:
    total = np.zeros(provider.dim)
    count = 0
    for tok in tokens:
        vec = provider.vector(tok)
        if vec is not None:
            total += vec
        count += 1
    return total / count if count else total


def embed_tokens(provider: EmbeddingProvider, tokens: Sequence[str]) -> np.ndarray:
    """Mean of token vectors; misses count as zero vectors."""
    return _mean(provider, tokens)


def embed_sentence(provider: EmbeddingProvider, sentence: Sentence) -> np.ndarray:
    return _mean(provider, sentence.tokens)


def embed_document(provider: EmbeddingProvider, doc: Document) -> np.ndarray:
    """Mean over every token of the document, not a mean of sentence means."""
    tokens = doc.tokens
    if not tokens:
        raise InputError(f"document {doc.id!r} has no tokens")
    return _mean(provider, tokens)


def load_vectors(path: str | Path) -> LookupProvider:
    """Read a ``WORDVEC v1 <n>`` file into a lookup provider."""
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read word vectors {path}: {exc}") from exc
    table: dict[str, np.ndarray] = {}
    with fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != WORDVEC_MAGIC or header[1] != WORDVEC_VERSION:
            raise FormatError(f"{path}:1: expected header 'WORDVEC v1 <n>'")
        try:
            dim = int(header[2])
        except ValueError:
            raise FormatError(f"{path}:1: bad dimension {header[2]!r}") from None
        if dim < 2:
            raise FormatError(f"{path}:1: dimension must be >= 2")
        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split(" ")
            if fields == [""]:
                continue
            if len(fields) != dim + 1:
                raise FormatError(f"{path}:{lineno}: expected {dim} values, got {len(fields) - 1}")
            token = fields[0]
            if token in table:
                raise FormatError(f"{path}:{lineno}: duplicate token {token!r}")
            try:
                table[token] = np.array([float(x) for x in fields[1:]])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric value") from None
            if not np.all(np.isfinite(table[token])):
                raise FormatError(f"{path}:{lineno}: non-finite value")
    return LookupProvider(table, dim, source=str(path))


def save_vectors(path: str | Path, table: Mapping[str, Sequence[float]], dim: int) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{WORDVEC_MAGIC} {WORDVEC_VERSION} {dim}\n")
        for token, vec in table.items():
            fh.write(token + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def make_provider(spec: str) -> EmbeddingProvider:
    """Build a provider from ``hashed[:dim[:seed]]`` or ``vectors:<path>``."""
    kind, _, rest = spec.partition(":")
    if kind == "hashed":
        parts = [p for p in rest.split(":") if p] if rest else []
        try:
            dim = int(parts[0]) if parts else 64
            seed = int(parts[1]) if len(parts) > 1 else 0
        except ValueError:
            raise ConfigError(f"bad embedding spec {spec!r}") from None
        return HashedProvider(dim, seed)
    if kind == "vectors" and rest:
        return load_vectors(rest)
    raise ConfigError(f"bad embedding spec {spec!r}; use 'hashed:<dim>:<seed>' or 'vectors:<path>'")
