"""JSON Lines readers/writers and input digests."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import SchemaError
from .scores import AnnotationRecord, ScoreVector


@dataclass(frozen=True)
class BadLine:
    lineno: int
    error: str


def iter_jsonl(path) -> Iterator[tuple[int, Any]]:
    """Yield ``(lineno, row)`` for every non-blank line; undecodable lines yield a BadLine."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, BadLine(lineno, f"invalid JSON: {exc.msg}")


def read_jsonl(path) -> list[dict]:
    """Strict reader: any malformed line is a SchemaError."""
    rows = []
    for lineno, row in iter_jsonl(path):
        if isinstance(row, BadLine):
            raise SchemaError(f"{path}:{lineno}: {row.error}")
        if not isinstance(row, dict):
            raise SchemaError(f"{path}:{lineno}: expected a JSON object")
        rows.append(row)
    return rows


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def write_jsonl(path, rows: Iterable[Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps(row))
            fh.write("\n")


def write_json(path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False))
        fh.write("\n")


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def load_annotations(path, taxonomy=None) -> list[AnnotationRecord]:
    """Load annotation rows; ids must be unique. Tags are checked only when ``taxonomy`` is given."""
    records = []
    seen = set()
    for lineno, row in enumerate(read_jsonl(path), 1):
        try:
            rec = AnnotationRecord.from_dict(row)
        except (SchemaError, ValueError) as exc:
            raise SchemaError(f"{path}: row {lineno}: {exc}") from None
        if rec.id in seen:
            raise SchemaError(f"{path}: duplicate id {rec.id!r}")
        seen.add(rec.id)
        if taxonomy is not None:
            rec.validate_tags(taxonomy)
        records.append(rec)
    return records


def dump_annotations(path, records: Iterable[AnnotationRecord]) -> None:
    write_jsonl(path, (r.to_dict() for r in records))


@dataclass(frozen=True)
class ScoredItem:
    """A predicted (or human) score vector for one item, optionally tagged with a model name."""

    id: str
    model: str
    scores: ScoreVector


def load_scored(path, id_key: str = "id", default_model: str = "model") -> list[ScoredItem]:
    items = []
    seen = set()
    for lineno, row in enumerate(read_jsonl(path), 1):
        if id_key not in row or "scores" not in row:
            raise SchemaError(f"{path}: row {lineno}: expected keys {id_key!r} and 'scores'")
        try:
            scores = ScoreVector.from_mapping(row["scores"])
        except ValueError as exc:
            raise SchemaError(f"{path}: row {lineno}: {exc}") from None
        item = ScoredItem(str(row[id_key]), str(row.get("model", default_model)), scores)
        key = (item.model, item.id)
        if key in seen:
            raise SchemaError(f"{path}: duplicate {id_key} {item.id!r} for model {item.model!r}")
        seen.add(key)
        items.append(item)
    return items


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
