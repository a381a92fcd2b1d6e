"""Readers and writers for every file the pipeline exchanges.

Floats are written with ``repr`` (shortest round-trip form), so reading a file
and writing it back reproduces it byte for byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .cluster import ClusterModel
from .errors import FormatError, InputError
from .oracle import OracleLabel
from .rank import RankModel
from .textproc import Document

log = logging.getLogger(__name__)

RANK_MAGIC = "SUMHIS-RANK"
CLUSTER_MAGIC = "SUMHIS-CLUST"
VERSION = "v1"


def _write_matrix(path: Path, magic: str, M: np.ndarray) -> None:
    rows, cols = M.shape
    lines = [f"{magic} {VERSION} {rows} {cols}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in M]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_matrix(path: Path, magic: str) -> np.ndarray:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    if not lines:
        raise FormatError(f"{path}: empty model file")
    header = lines[0].split()
    if len(header) != 4 or header[0] != magic or header[1] != VERSION:
        raise FormatError(f"{path}:1: expected header '{magic} {VERSION} <rows> <cols>'")
    try:
        rows, cols = int(header[2]), int(header[3])
    except ValueError:
        raise FormatError(f"{path}:1: bad matrix shape") from None
    body = lines[1:]
    if len(body) != rows:
        raise FormatError(f"{path}: expected {rows} rows, found {len(body)}")
    M = np.empty((rows, cols))
    for r, line in enumerate(body):
        fields = line.split(" ")
        if len(fields) != cols:
            raise FormatError(f"{path}:{r + 2}: expected {cols} values, got {len(fields)}")
        try:
            M[r] = [float(x) for x in fields]
        except ValueError:
            raise FormatError(f"{path}:{r + 2}: non-numeric value") from None
    if not np.all(np.isfinite(M)):
        raise FormatError(f"{path}: non-finite entries")
    return M


def save_rank_model(path: str | Path, model: RankModel) -> None:
    _write_matrix(Path(path), RANK_MAGIC, model.W)


def load_rank_model(path: str | Path) -> RankModel:
    return RankModel(_read_matrix(Path(path), RANK_MAGIC))


def save_cluster_model(path: str | Path, model: ClusterModel) -> None:
    _write_matrix(Path(path), CLUSTER_MAGIC, model.C)


def load_cluster_model(path: str | Path) -> ClusterModel:
    return ClusterModel(_read_matrix(Path(path), CLUSTER_MAGIC))


def _dump(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(_dump(rec) + "\n")
            count += 1
    return count


@dataclass
class MalformedLine:
    lineno: int
    reason: str


def read_jsonl(path: str | Path, problems: list[MalformedLine] | None = None) -> Iterator[tuple[int, dict]]:
    """Yield ``(line number, object)``; bad lines go to ``problems`` and are skipped."""
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                obj = None
                reason = f"invalid JSON ({exc.msg})"
            else:
                reason = "not an object"
            if not isinstance(obj, dict):
                log.warning("%s:%d: %s", path, lineno, reason)
                if problems is not None:
                    problems.append(MalformedLine(lineno, reason))
                continue
            yield lineno, obj


def _string_fields(obj: dict, names: tuple[str, ...]) -> str | None:
    for name in names:
        if not isinstance(obj.get(name), str):
            return f"field {name!r} missing or not a string"
    return None


def ingest(path: str | Path, problems: list[MalformedLine] | None = None) -> Iterator[Document]:
    """Stream documents from ``{"id", "text", "summary"}`` records.

    Malformed lines are reported and skipped. Duplicate ids, or a file with no
    valid record, raise :class:`InputError` once the stream is exhausted.
    """
    problems = problems if problems is not None else []
    seen: set[str] = set()
    dups: list[str] = []
    count = 0
    for lineno, obj in read_jsonl(path, problems):
        bad = _string_fields(obj, ("id", "text", "summary"))
        if bad:
            log.warning("%s:%d: %s", path, lineno, bad)
            problems.append(MalformedLine(lineno, bad))
            continue
        if obj["id"] in seen:
            dups.append(obj["id"])
            continue
        seen.add(obj["id"])
        count += 1
        yield Document(obj["id"], obj["text"], obj["summary"])
    if dups:
        raise InputError(f"{path}: duplicate document ids: {', '.join(sorted(set(dups)))}")
    if not count:
        raise InputError(f"{path}: no valid records")


def load_corpus(path: str | Path) -> list[Document]:
    return list(ingest(path))


def label_record(label: OracleLabel) -> dict:
    rec = {"id": label.doc_id, "selected": list(label.selected), "score": label.score, "mode": label.mode_used}
    if label.fallback:
        rec["fallback"] = True
    return rec


def write_labels(path: str | Path, labels: Iterable[OracleLabel]) -> int:
    return write_jsonl(path, (label_record(lab) for lab in labels))


def read_labels(path: str | Path) -> dict[str, OracleLabel]:
    labels: dict[str, OracleLabel] = {}
    for lineno, obj in read_jsonl(path):
        try:
            sel = obj["selected"]
            if not isinstance(obj["id"], str) or not all(isinstance(i, int) for i in sel):
                raise TypeError
            label = OracleLabel(obj["id"], tuple(sel), float(obj["score"]), str(obj["mode"]),
                                bool(obj.get("fallback", False)))
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}:{lineno}: malformed label record") from None
        if label.doc_id in labels:
            raise FormatError(f"{path}:{lineno}: duplicate label id {label.doc_id!r}")
        labels[label.doc_id] = label
    return labels


@dataclass(frozen=True)
class SummaryRecord:
    id: str
    summary: str
    indices: tuple[int, ...]
    fallback: bool = False

    def to_json(self) -> dict:
        rec = {"id": self.id, "summary": self.summary, "indices": list(self.indices)}
        if self.fallback:
            rec["fallback"] = True
        return rec


def write_summaries(path: str | Path, records: Iterable[SummaryRecord]) -> int:
    return write_jsonl(path, (r.to_json() for r in records))


def read_summaries(path: str | Path) -> dict[str, SummaryRecord]:
    out: dict[str, SummaryRecord] = {}
    for lineno, obj in read_jsonl(path):
        try:
            rec = SummaryRecord(obj["id"], obj["summary"], tuple(obj["indices"]), bool(obj.get("fallback", False)))
            if not isinstance(rec.id, str) or not isinstance(rec.summary, str):
                raise TypeError
        except (KeyError, TypeError):
            raise FormatError(f"{path}:{lineno}: malformed summary record") from None
        if rec.id in out:
            raise FormatError(f"{path}:{lineno}: duplicate summary id {rec.id!r}")
        out[rec.id] = rec
    return out
