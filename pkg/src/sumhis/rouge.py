"""ROUGE-N and ROUGE-L over token lists (no stemming, no stopword removal)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .textproc import ngrams

Tokens = Sequence[str]


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(precision, recall, f1)


ZERO = RougeScore(0.0, 0.0, 0.0)


def rouge_n_counts(candidate: Tokens, references: Sequence[Tokens], n: int) -> tuple[int, int, int]:
    """Return ``(matches, precision_denominator, recall_denominator)``.

    Matches are clipped per reference and summed over the reference set; the
    candidate's n-gram total is counted once per reference.
    """
    if n < 1:
        raise ValueError(f"ROUGE order must be >= 1, got {n}")
    if not references:
        raise ValueError("at least one reference is required")
    cand = ngrams(candidate, n)
    cand_total = sum(cand.values())
    matches = ref_total = 0
    for ref in references:
        ref_counts = ngrams(ref, n)
        ref_total += sum(ref_counts.values())
        matches += sum(min(c, cand[g]) for g, c in ref_counts.items() if g in cand)
    return matches, cand_total * len(references), ref_total


def rouge_n(candidate: Tokens, references: Sequence[Tokens], n: int) -> RougeScore:
    matches, p_den, r_den = rouge_n_counts(candidate, references, n)
    precision = matches / p_den if p_den else 0.0
    recall = matches / r_den if r_den else 0.0
    return RougeScore.from_pr(precision, recall)


def lcs_length(a: Tokens, b: Tokens) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Tokens, reference: Tokens) -> RougeScore:
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore.from_pr(precision, recall)


def score(candidate: Tokens, reference: Tokens, variant: str) -> RougeScore:
    """Score one candidate/reference pair; ``variant`` is ``"1"``, ``"2"``... or ``"L"``."""
    if variant.upper() == "L":
        return rouge_l(candidate, reference)
    return rouge_n(candidate, [reference], int(variant))
