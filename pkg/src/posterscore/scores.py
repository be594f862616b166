"""Score, tier and dimension domain model.

Scores live on the continuous [1.0, 5.0] scale and are kept at full float
precision; only serialization rounds them (one decimal, as annotated).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterator, Mapping

from .errors import NotFinite, OutOfRange, SchemaError

SCORE_MIN = 1.0
SCORE_MAX = 5.0

# Absolute slack for inclusive "<= threshold" comparisons on differences of
# one-decimal scores (|3.1 - 2.9| is 0.2000000000000002 in binary floating point).
BOUNDARY_EPS = 1e-9


class Dimension(str, enum.Enum):
    OBJECT = "object"
    BACKGROUND = "background"
    TEXT = "text"
    LAYOUT = "layout"
    OVERALL = "overall"

    @property
    def label(self) -> str:
        return self.value.capitalize()


DIMENSIONS: tuple[Dimension, ...] = tuple(Dimension)
SUB_DIMENSIONS: tuple[Dimension, ...] = DIMENSIONS[:4]


class Tier(enum.IntEnum):
    POOR = 0
    GOOD = 1
    EXCELLENT = 2


class SourceKind(str, enum.Enum):
    MERCHANT_HQ = "merchant_hq"
    MERCHANT_LQ = "merchant_lq"
    OPEN_SOURCE = "open_source"
    AI_GENERATED = "ai_generated"
    AI_EDITED = "ai_edited"
    PROFESSIONAL = "professional"

    @classmethod
    def parse(cls, raw: str) -> "SourceKind":
        try:
            return cls(raw)
        except ValueError:
            raise SchemaError(f"unknown source {raw!r}; expected one of {[s.value for s in cls]}") from None


SOURCES: tuple[SourceKind, ...] = tuple(SourceKind)


def parse_score(raw: float) -> float:
    """Validate a raw score. Out-of-range values are rejected, never clamped."""
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise SchemaError(f"score must be a number, got {type(raw).__name__}")
    value = float(raw)
    if not math.isfinite(value):
        raise NotFinite(raw)
    if not SCORE_MIN <= value <= SCORE_MAX:
        raise OutOfRange(raw)
    return value


def tier_of(score: float) -> Tier:
    if score >= 4.0:
        return Tier.EXCELLENT
    if score >= 3.0:
        return Tier.GOOD
    return Tier.POOR


@dataclass(frozen=True)
class ScoreVector:
    object: float
    background: float
    text: float
    layout: float
    overall: float

    def __post_init__(self):
        for dim in DIMENSIONS:
            object.__setattr__(self, dim.value, parse_score(getattr(self, dim.value)))

    def __getitem__(self, dim: Dimension | str) -> float:
        return getattr(self, Dimension(dim).value)

    def __iter__(self) -> Iterator[float]:
        return iter(self.as_list())

    def as_list(self) -> list[float]:
        return [getattr(self, d.value) for d in DIMENSIONS]

    def sub_vector(self) -> list[float]:
        """Object, Background, Text, Layout (Overall excluded)."""
        return [getattr(self, d.value) for d in SUB_DIMENSIONS]

    @classmethod
    def from_list(cls, values) -> "ScoreVector":
        values = list(values)
        if len(values) != len(DIMENSIONS):
            raise SchemaError(f"expected {len(DIMENSIONS)} scores, got {len(values)}")
        return cls(*values)

    @classmethod
    def uniform(cls, value: float) -> "ScoreVector":
        return cls(value, value, value, value, value)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ScoreVector":
        if not isinstance(data, Mapping):
            raise SchemaError("scores must be an object")
        missing = [d.value for d in DIMENSIONS if d.value not in data]
        if missing:
            raise SchemaError(f"scores missing keys {missing}")
        return cls(**{d.value: data[d.value] for d in DIMENSIONS})

    def to_dict(self, decimals: int | None = 1) -> dict[str, float]:
        if decimals is None:
            return {d.value: getattr(self, d.value) for d in DIMENSIONS}
        return {d.value: round(getattr(self, d.value), decimals) for d in DIMENSIONS}


def sub_vector(v: ScoreVector) -> list[float]:
    return v.sub_vector()


def load_taxonomy(path=None) -> dict[Dimension, frozenset[str]]:
    """Per-dimension issue tags. Defaults to the bundled annotation checklist."""
    if path is None:
        text = resources.files("posterscore").joinpath("data/taxonomy.json").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    raw = json.loads(text)
    return {Dimension(k): frozenset(v) for k, v in raw.items()}


OTHER_TAG_PREFIX = "other:"


@dataclass(frozen=True)
class AnnotationRecord:
    id: str
    source: SourceKind
    scores: ScoreVector
    tags: dict[Dimension, tuple[str, ...]] = field(default_factory=dict)
    cot: str | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise SchemaError("record id must be a non-empty string")
        for dim in self.tags:
            if dim not in SUB_DIMENSIONS:
                raise SchemaError(f"tags given for non-sub-dimension {dim!r}")

    def validate_tags(self, taxonomy: Mapping[Dimension, frozenset[str]]) -> None:
        """Raise SchemaError for tags outside the taxonomy. Free-form tags use the ``other:`` prefix."""
        for dim, tags in self.tags.items():
            allowed = taxonomy.get(dim, frozenset())
            for tag in tags:
                if tag.startswith(OTHER_TAG_PREFIX) or tag in allowed:
                    continue
                raise SchemaError(f"record {self.id}: tag {tag!r} not in {dim.value} taxonomy")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "source": self.source.value,
            "scores": self.scores.to_dict(),
            "tags": {d.value: list(self.tags[d]) for d in SUB_DIMENSIONS if d in self.tags},
        }
        if self.cot is not None:
            out["cot"] = self.cot
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "AnnotationRecord":
        if not isinstance(data, Mapping):
            raise SchemaError("annotation row must be an object")
        for key in ("id", "source", "scores"):
            if key not in data:
                raise SchemaError(f"annotation row missing {key!r}")
        raw_tags = data.get("tags") or {}
        if not isinstance(raw_tags, Mapping):
            raise SchemaError("tags must be an object of arrays")
        tags = {}
        for key, values in raw_tags.items():
            try:
                dim = Dimension(key)
            except ValueError:
                raise SchemaError(f"unknown tag dimension {key!r}") from None
            if not isinstance(values, list) or not all(isinstance(t, str) for t in values):
                raise SchemaError(f"tags.{key} must be an array of strings")
            tags[dim] = tuple(values)
        cot = data.get("cot")
        if cot is not None and not isinstance(cot, str):
            raise SchemaError("cot must be a string")
        return cls(
            id=data["id"],
            source=SourceKind.parse(data["source"]),
            scores=ScoreVector.from_mapping(data["scores"]),
            tags=tags,
            cot=cot,
        )
