"""Extractive oracle labels: the sentence subset of a document that best
matches its abstractive summary under ROUGE-N, within a word budget."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Literal

from .errors import ConfigError, OracleError
from .rouge import rouge_n_counts
from .textproc import Document

log = logging.getLogger(__name__)

EXHAUSTIVE_CAP = 25


@dataclass(frozen=True)
class OracleConfig:
    n: int = 2
    length_factor: float = 2.0
    mode: Literal["exhaustive", "greedy", "auto"] = "auto"
    auto_cutoff: int = 12

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"oracle n must be >= 1, got {self.n}")
        if not self.length_factor > 0:
            raise ConfigError(f"length_factor must be > 0, got {self.length_factor}")
        if self.mode not in ("exhaustive", "greedy", "auto"):
            raise ConfigError(f"unknown oracle mode {self.mode!r}")
        if self.auto_cutoff < 1:
            raise ConfigError(f"auto_cutoff must be >= 1, got {self.auto_cutoff}")


@dataclass(frozen=True)
class OracleLabel:
    doc_id: str
    selected: tuple[int, ...]
    score: float
    mode_used: str
    fallback: bool = False


class _Objective:
    """Exact ROUGE-N F1 of a sentence subset against the gold summary."""

    def __init__(self, doc: Document, cfg: OracleConfig):
        if not doc.sentences:
            raise OracleError(f"document {doc.id!r} has no sentences")
        self.gold = doc.gold_tokens
        if not self.gold:
            raise OracleError(f"document {doc.id!r} has an empty gold summary")
        self.doc = doc
        self.n = cfg.n
        self.lengths = [len(s.tokens) for s in doc.sentences]
        self.budget = cfg.length_factor * len(self.gold)

    def tokens(self, subset) -> list[str]:
        return [tok for i in sorted(subset) for tok in self.doc.sentences[i].tokens]

    def exact(self, subset) -> Fraction:
        # F1 = 2m / (P_den + R_den); compared as a fraction so ties are exact
        m, p_den, r_den = rouge_n_counts(self.tokens(subset), [self.gold], self.n)
        return Fraction(2 * m, p_den + r_den) if m else Fraction(0)

    def fits(self, subset) -> bool:
        return sum(self.lengths[i] for i in subset) <= self.budget

    def label(self, subset, mode: str, fallback: bool = False) -> OracleLabel:
        subset = tuple(sorted(subset))
        value = float(self.exact(subset))
        return OracleLabel(self.doc.id, subset, value, mode, fallback)

    def fallback(self, mode: str) -> OracleLabel | None:
        """Best single sentence when no sentence fits the budget on its own."""
        if any(length <= self.budget for length in self.lengths):
            return None
        best = max(range(len(self.lengths)), key=lambda i: (self.exact((i,)), -i))
        log.warning("document %s: no sentence fits the length budget, using fallback", self.doc.id)
        return self.label((best,), mode, fallback=True)


def exhaustive_oracle(doc: Document, cfg: OracleConfig = OracleConfig()) -> OracleLabel:
    """Search every sentence subset within the budget.

    Ties go to fewer sentences, then to the lexicographically smallest index
    tuple. Documents over 25 sentences are refused.
    """
    if len(doc.sentences) > EXHAUSTIVE_CAP:
        raise OracleError(
            f"document {doc.id!r} has {len(doc.sentences)} sentences; exhaustive search "
            f"is capped at {EXHAUSTIVE_CAP}, use greedy mode"
        )
    obj = _Objective(doc, cfg)
    fb = obj.fallback("exhaustive")
    if fb is not None:
        return fb
    count = len(obj.lengths)
    best, best_value = (), Fraction(0)
    # sizes ascending, combinations in lexicographic order: strict improvement keeps the tie rule
    for size in range(1, count + 1):
        for subset in itertools.combinations(range(count), size):
            if not obj.fits(subset):
                continue
            value = obj.exact(subset)
            if value > best_value:
                best, best_value = subset, value
    return obj.label(best, "exhaustive")


def greedy_oracle(doc: Document, cfg: OracleConfig = OracleConfig()) -> OracleLabel:
    obj = _Objective(doc, cfg)
    fb = obj.fallback("greedy")
    if fb is not None:
        return fb
    selected: list[int] = []
    current = Fraction(0)
    while True:
        best_i, best_value = None, current
        for i in range(len(obj.lengths)):
            if i in selected or not obj.fits(selected + [i]):
                continue
            value = obj.exact(selected + [i])
            if value > best_value:
                best_i, best_value = i, value
        if best_i is None:
            break
        selected.append(best_i)
        current = best_value
    return obj.label(selected, "greedy")


def oracle_label(doc: Document, cfg: OracleConfig = OracleConfig()) -> OracleLabel:
    if cfg.mode == "exhaustive":
        return exhaustive_oracle(doc, cfg)
    if cfg.mode == "greedy":
        return greedy_oracle(doc, cfg)
    if len(doc.sentences) <= cfg.auto_cutoff:
        return exhaustive_oracle(doc, cfg)
    return greedy_oracle(doc, cfg)


@dataclass
class ConversionStats:
    labelled: int = 0
    skipped: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)


def convert_dataset(
    docs: Iterable[Document], cfg: OracleConfig = OracleConfig(), stats: ConversionStats | None = None
) -> Iterator[OracleLabel]:
    """Label a stream of documents.

    Documents with an empty gold summary are skipped; documents that cannot be
    labelled are recorded in ``stats.failed`` and processing continues.
    """
    stats = stats if stats is not None else ConversionStats()
    for doc in docs:
        if not doc.gold_tokens:
            stats.skipped.append(doc.id)
            continue
        try:
            label = oracle_label(doc, cfg)
        except OracleError as exc:
            log.error("document %s: %s", doc.id, exc)
            stats.failed.append((doc.id, str(exc)))
            continue
        stats.labelled += 1
        yield label
