"""Source-stratified hard-sample selection.

Each training sample is scored by the mean squared error of the SFT
prediction. Every source s gets the quota floor(K * N_s / sum(N)), and the
K_s highest-error samples of that source are kept. The floor remainder is
left unfilled unless ``fill_remainder`` is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EmptyPopulation, MissingPrediction, QuotaExceedsPopulation
from .scores import SOURCES, AnnotationRecord, ScoreVector, SourceKind
from .stats import mse


@dataclass(frozen=True)
class ErrorRecord:
    id: str
    source: SourceKind
    error: float

    def __post_init__(self):
        if not math.isfinite(self.error) or self.error < 0:
            raise ValueError(f"error for {self.id!r} must be finite and >= 0, got {self.error!r}")


@dataclass(frozen=True)
class SelectionPlan:
    k: int
    quotas: dict[SourceKind, int]
    populations: dict[SourceKind, int]

    @property
    def remainder(self) -> int:
        return self.k - sum(self.quotas.values())

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "quotas": {s.value: self.quotas[s] for s in SOURCES if s in self.quotas},
            "populations": {s.value: self.populations[s] for s in SOURCES if s in self.populations},
            "remainder": self.remainder,
        }


def compute_errors(preds: Mapping[str, ScoreVector], gts: Iterable[AnnotationRecord]) -> list[ErrorRecord]:
    out = []
    for rec in gts:
        if rec.id not in preds:
            raise MissingPrediction(rec.id)
        out.append(ErrorRecord(rec.id, rec.source, mse(preds[rec.id], rec.scores)))
    return out


def populations_of(errors: Iterable[ErrorRecord]) -> dict[SourceKind, int]:
    pops = {s: 0 for s in SOURCES}
    for e in errors:
        pops[e.source] += 1
    return pops


def plan_quotas(populations: Mapping[SourceKind, int], k: int) -> SelectionPlan:
    if k < 0:
        raise ValueError("k must be >= 0")
    total = sum(populations.values())
    if total <= 0:
        raise EmptyPopulation("no samples in any source")
    pops = {s: populations.get(s, 0) for s in SOURCES}
    quotas = {s: (k * n) // total for s, n in pops.items()}
    return SelectionPlan(k, quotas, pops)


def _rank_key(e: ErrorRecord):
    return (-e.error, e.id)


def select_hard(errors: Sequence[ErrorRecord], plan: SelectionPlan, fill_remainder: bool = False) -> list[str]:
    """Top-K_s ids per source by descending error (ties on ascending id).

    Output is ordered by source (canonical order), then rank. With
    ``fill_remainder`` the unfilled floor remainder is topped up from the
    highest-error unselected samples of any source, appended in rank order.
    """
    by_source: dict[SourceKind, list[ErrorRecord]] = {s: [] for s in SOURCES}
    for e in errors:
        by_source[e.source].append(e)
    selected: list[str] = []
    leftovers: list[ErrorRecord] = []
    for src in SOURCES:
        bucket = sorted(by_source[src], key=_rank_key)
        quota = plan.quotas.get(src, 0)
        if quota > len(bucket):
            raise QuotaExceedsPopulation(f"{src.value}: quota {quota} > population {len(bucket)}")
        selected.extend(e.id for e in bucket[:quota])
        leftovers.extend(bucket[quota:])
    if fill_remainder and plan.remainder > 0:
        leftovers.sort(key=_rank_key)
        selected.extend(e.id for e in leftovers[: plan.remainder])
    return selected


def select_global(errors: Sequence[ErrorRecord], k: int) -> list[str]:
    """Unstratified reading: the K highest-error samples overall."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return [e.id for e in sorted(errors, key=_rank_key)[:k]]
