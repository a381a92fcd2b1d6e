"""Generator for the small synthetic corpus bundled with the package.

Each document has several sentences on one topic and a single off-topic
sentence drawn from a separate vocabulary; the gold summary reuses wording
from two on-topic sentences. ``python -m sumhis.fixture`` rewrites the
bundled file.
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

TOPICS = {
    "space": "orbit capsule astronaut launch rocket station crew landing".split(),
    "election": "vote ballot candidate campaign senator poll district turnout".split(),
    "football": "striker goal keeper midfield penalty league coach stadium".split(),
    "medicine": "patient vaccine clinic doctor surgery virus hospital nurse".split(),
    "markets": "shares investor stock bond trader dividend index earnings".split(),
}
OFF_TOPIC = "recipe garden sunset puppy painting violin blossom picnic".split()
FILLER = "the a of in on with".split()

FIXTURE_NAME = "fixture.jsonl"


def _sentence(rng: random.Random, words: list[str], length: int, filler: float = 0.0) -> str:
    body = []
    for _ in range(length):
        body.append(rng.choice(FILLER) if rng.random() < filler else rng.choice(words))
    body[0] = body[0].capitalize()
    return " ".join(body) + "."


def make_documents(count: int = 20, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    topics = sorted(TOPICS)
    docs = []
    for k in range(count):
        words = TOPICS[topics[k % len(topics)]]
        on_topic = [_sentence(rng, words, rng.randint(7, 10)) for _ in range(rng.randint(4, 6))]
        off = _sentence(rng, OFF_TOPIC, rng.randint(7, 10))
        sentences = list(on_topic)
        sentences.insert(rng.randint(1, len(sentences)), off)
        summary_src = rng.sample(on_topic, 2)
        summary = []
        for sent in summary_src:
            toks = sent.rstrip(".").split()
            keep = sorted(rng.sample(range(len(toks)), len(toks) - 2))
            summary.append(" ".join(toks[i] for i in keep) + ".")
        docs.append({"id": f"doc{k:02d}", "text": " ".join(sentences), "summary": " ".join(summary)})
    return docs


def write_fixture(path: str | Path, count: int = 20, seed: int = 7) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for doc in make_documents(count, seed):
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")


def fixture_path() -> Path:
    return Path(str(resources.files("sumhis") / "data" / FIXTURE_NAME))


if __name__ == "__main__":
    write_fixture(fixture_path())
    print(fixture_path())
