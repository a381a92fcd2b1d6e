"""Brute-force reference implementations used only by the tests.

Nothing here imports the code under test beyond plain data types.
"""

import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np


def naive_rouge_n(candidate, references, n):
    """Nested-loop ROUGE-N; returns (precision, recall, f1)."""

    def grams(tokens):
        return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]

    cand = grams(candidate)
    matches = ref_total = 0
    for ref in references:
        ref_grams = grams(ref)
        ref_total += len(ref_grams)
        used = [False] * len(cand)
        for g in ref_grams:
            for k, c in enumerate(cand):
                if not used[k] and c == g:
                    used[k] = True
                    matches += 1
                    break
    p_den = len(cand) * len(references)
    p = matches / p_den if p_den else 0.0
    r = matches / ref_total if ref_total else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def naive_lcs(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def enumerate_oracle(sentences, gold, n, length_factor=2.0):
    """Best subset by exact ROUGE-N F1 under the word budget.

    ``sentences`` and ``gold`` are token lists. Ties: fewer sentences, then the
    lexicographically smallest index tuple. Returns (subset, Fraction score).
    """

    def f1(subset):
        cand = [t for i in subset for t in sentences[i]]
        cg = [tuple(cand[i:i + n]) for i in range(len(cand) - n + 1)]
        gg = [tuple(gold[i:i + n]) for i in range(len(gold) - n + 1)]
        m = sum(min(cg.count(g), gg.count(g)) for g in set(gg))
        return Fraction(2 * m, len(cg) + len(gg)) if m else Fraction(0)

    budget = length_factor * len(gold)
    candidates = []
    for size in range(len(sentences) + 1):
        for subset in itertools.combinations(range(len(sentences)), size):
            if sum(len(sentences[i]) for i in subset) <= budget:
                candidates.append(subset)
    best = min(candidates, key=lambda s: (-f1(s), len(s), s))
    return best, f1(best)


def finite_difference(f, X, h=1e-5):
    """Central differences of scalar ``f`` w.r.t. every entry of array ``X``."""
    X = np.array(X, dtype=np.float64)
    grad = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        orig = X[idx]
        X[idx] = orig + h
        up = f(X)
        X[idx] = orig - h
        down = f(X)
        X[idx] = orig
        grad[idx] = (up - down) / (2 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-8):
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), floor)
    return float(np.abs(analytic - numeric).max() / scale)
