"""Tokenization, sentence segmentation and n-gram counting.

The rules here are deliberately simple and fixed so that every score computed
downstream (ROUGE, oracle labels, length budgets) is reproducible exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

ABBREVIATIONS = frozenset({"mr", "mrs", "ms", "dr", "st", "vs", "e.g", "i.e", "etc", "u.s", "u.k"})
TERMINATORS = ".!?"

NGram = tuple


def _lower(text: str) -> str:
    # simple per-character mapping; full mappings that change length are skipped
    out = []
    for ch in text:
        low = ch.lower()
        out.append(low if len(low) == 1 else ch)
    return "".join(out)


def _strip_edges(word: str) -> str:
    start, end = 0, len(word)
    while start < end and not word[start].isalnum():
        start += 1
    while end > start and not word[end - 1].isalnum():
        end -= 1
    return word[start:end]


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace and strip non-alphanumeric edges.

    Internal punctuation survives, so ``"U.S.-based"`` stays one token.
    """
    tokens = []
    for chunk in _lower(text).split():
        word = _strip_edges(chunk)
        if word:
            tokens.append(word)
    return tokens


def word_count(text: str) -> int:
    return len(tokenize(text))


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    tokens: tuple[str, ...]


def _is_abbreviation(text: str, dot: int) -> bool:
    start = dot
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = _strip_edges(_lower(text[start:dot]))
    return word in ABBREVIATIONS


def _boundaries(text: str) -> list[int]:
    """End offsets (exclusive) of every sentence-ending terminator."""
    ends = []
    for i, ch in enumerate(text):
        if ch not in TERMINATORS:
            continue
        if i + 1 < len(text) and not text[i + 1].isspace():
            continue
        if ch == "." and _is_abbreviation(text, i):
            continue
        ends.append(i + 1)
    return ends


def split_sentences(text: str) -> list[Sentence]:
    """Split ``text`` at ``.``, ``!`` or ``?`` followed by whitespace or the end.

    A period closing a known abbreviation (``Dr.``, ``U.S.``...) does not end a
    sentence. Segments without any token are dropped and indices are assigned
    after dropping.
    """
    sentences: list[Sentence] = []
    start = 0
    for end in _boundaries(text) + [len(text)]:
        if end <= start:
            continue
        chunk = text[start:end].strip()
        start = end
        tokens = tokenize(chunk)
        if tokens:
            sentences.append(Sentence(len(sentences), chunk, tuple(tokens)))
    return sentences


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    if n < 1:
        raise ValueError(f"n-gram length must be >= 1, got {n}")
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


@dataclass
class Document:
    id: str
    text: str
    gold_summary: str = ""
    sentences: list[Sentence] = field(init=False, repr=False)

    def __post_init__(self):
        self.sentences = split_sentences(self.text)

    @property
    def tokens(self) -> list[str]:
        return [tok for sent in self.sentences for tok in sent.tokens]

    @property
    def gold_tokens(self) -> list[str]:
        return tokenize(self.gold_summary)


def join_tokens(sentences: Iterable[Sentence]) -> list[str]:
    return [tok for sent in sentences for tok in sent.tokens]
