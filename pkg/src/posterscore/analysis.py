"""Dataset statistics over annotation records: inter-dimension correlation,
weakest-link attribution, score/CoT-length distributions, per-source means and
CoT edit rate. Results are plain data; ``write_*_csv`` helpers emit
plot-ready tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSeries, EmptyOriginal
from .scores import SCORE_MAX, SCORE_MIN, SOURCES, SUB_DIMENSIONS, AnnotationRecord, Dimension, SourceKind
from .stats import plcc
from .textmetrics import levenshtein


@dataclass(frozen=True)
class CorrelationMatrix:
    dims: tuple[Dimension, ...]
    # None marks an undefined entry (constant dimension)
    values: tuple[tuple[float | None, ...], ...]
    mean_offdiag: float | None
    undefined_pairs: tuple[tuple[Dimension, Dimension], ...] = ()

    def __getitem__(self, key: tuple[Dimension, Dimension]) -> float | None:
        a, b = key
        return self.values[self.dims.index(a)][self.dims.index(b)]


def correlation_matrix(records: Sequence[AnnotationRecord]) -> CorrelationMatrix:
    """Pairwise Pearson correlation between the four sub-dimensions.

    Pairs involving a constant dimension are reported as None and excluded
    from ``mean_offdiag``.
    """
    if len(records) < 2:
        raise ValueError("correlation_matrix needs at least two records")
    cols = {d: [r.scores[d] for r in records] for d in SUB_DIMENSIONS}
    k = len(SUB_DIMENSIONS)
    grid: list[list[float | None]] = [[1.0 if i == j else None for j in range(k)] for i in range(k)]
    undefined = []
    offdiag = []
    for i, j in combinations(range(k), 2):
        a, b = SUB_DIMENSIONS[i], SUB_DIMENSIONS[j]
        try:
            r = plcc(cols[a], cols[b])
        except DegenerateSeries:
            undefined.append((a, b))
            continue
        grid[i][j] = grid[j][i] = r
        offdiag.append(r)
    mean = math.fsum(offdiag) / len(offdiag) if offdiag else None
    return CorrelationMatrix(SUB_DIMENSIONS, tuple(tuple(row) for row in grid), mean, tuple(undefined))


@dataclass(frozen=True)
class WeakestLinkReport:
    threshold: float
    total: int
    flagged: int
    counts: dict[Dimension, int]
    ties: int
    tie_ids: tuple[str, ...] = ()

    @property
    def percentages(self) -> dict[Dimension, float]:
        if self.flagged == 0:
            return {d: 0.0 for d in self.counts}
        return {d: 100.0 * c / self.flagged for d, c in self.counts.items()}

    def to_dict(self) -> dict:
        pct = self.percentages
        return {
            "threshold": self.threshold,
            "total": self.total,
            "flagged": self.flagged,
            "ties": self.ties,
            "counts": {d.value: self.counts[d] for d in SUB_DIMENSIONS},
            "percent": {d.value: pct[d] for d in SUB_DIMENSIONS},
        }


def bottleneck(record: AnnotationRecord) -> tuple[Dimension, bool]:
    """Lowest sub-dimension (first in canonical order on ties) and whether a tie occurred."""
    values = [record.scores[d] for d in SUB_DIMENSIONS]
    low = min(values)
    idx = values.index(low)
    return SUB_DIMENSIONS[idx], values.count(low) > 1


def weakest_link(records: Iterable[AnnotationRecord], threshold: float = 3.0) -> WeakestLinkReport:
    counts = {d: 0 for d in SUB_DIMENSIONS}
    total = flagged = 0
    tie_ids = []
    for rec in records:
        total += 1
        if min(rec.scores[d] for d in SUB_DIMENSIONS) >= threshold:
            continue
        flagged += 1
        dim, tied = bottleneck(rec)
        counts[dim] += 1
        if tied:
            tie_ids.append(rec.id)
    return WeakestLinkReport(threshold, total, flagged, counts, len(tie_ids), tuple(tie_ids))


@dataclass(frozen=True)
class DistributionSummary:
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    n: int
    mean: float
    median: float
    std: float

    def to_dict(self) -> dict:
        return {
            "edges": list(self.edges),
            "counts": list(self.counts),
            "n": self.n,
            "mean": self.mean,
            "median": self.median,
            "std": self.std,
        }


def _summarize(values: Sequence[float], bins: int, lo: float, hi: float) -> DistributionSummary:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    arr = np.asarray(values, dtype=float)
    # numpy closes the last bin, so the upper bound is representable
    counts, edges = np.histogram(arr, bins=bins, range=(lo, hi))
    if arr.size == 0:
        mean = median = std = math.nan
    else:
        mean, median, std = float(arr.mean()), float(np.median(arr)), float(arr.std())
    return DistributionSummary(
        tuple(float(e) for e in edges), tuple(int(c) for c in counts), int(arr.size), mean, median, std
    )


def score_distribution(records: Iterable[AnnotationRecord], dim: Dimension, bins: int = 8) -> DistributionSummary:
    """Equal-width histogram over [1, 5] plus mean, median and population std."""
    return _summarize([r.scores[dim] for r in records], bins, SCORE_MIN, SCORE_MAX)


def cot_length_distribution(records: Iterable[AnnotationRecord], bins: int = 10) -> DistributionSummary:
    """Histogram of CoT character counts; records without CoT are skipped."""
    lengths = [len(r.cot) for r in records if r.cot is not None]
    hi = float(max(lengths)) if lengths else 1.0
    return _summarize(lengths, bins, 0.0, max(hi, 1.0))


def cot_edit_rate(original: str, edited: str) -> float:
    """Character edit distance as a percentage of the original length.

    Can exceed 100 when the edit adds more text than the original held.
    """
    if not original:
        raise EmptyOriginal("original CoT is empty")
    return 100.0 * levenshtein(original, edited) / len(original)


@dataclass(frozen=True)
class SourceMeans:
    means: dict[SourceKind, dict[Dimension, float]]
    counts: dict[SourceKind, int]
    missing: tuple[SourceKind, ...] = field(default=())


def per_source_means(records: Iterable[AnnotationRecord]) -> SourceMeans:
    groups: dict[SourceKind, list[AnnotationRecord]] = {s: [] for s in SOURCES}
    for rec in records:
        groups[rec.source].append(rec)
    means, counts, missing = {}, {}, []
    for src in SOURCES:
        recs = groups[src]
        if not recs:
            missing.append(src)
            continue
        counts[src] = len(recs)
        means[src] = {d: math.fsum(r.scores[d] for r in recs) / len(recs) for d in Dimension}
    return SourceMeans(means, counts, tuple(missing))


def write_histogram_csv(path, summary: DistributionSummary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(summary.edges[:-1], summary.edges[1:], summary.counts):
            w.writerow([repr(lo), repr(hi), c])


def write_matrix_csv(path, matrix: CorrelationMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dimension", *[d.value for d in matrix.dims]])
        for d, row in zip(matrix.dims, matrix.values):
            w.writerow([d.value, *["" if v is None else repr(v) for v in row]])


def write_source_means_csv(path, table: SourceMeans) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "n", *[d.value for d in Dimension]])
        for src in SOURCES:
            if src in table.means:
                w.writerow([src.value, table.counts[src], *[repr(table.means[src][d]) for d in Dimension]])
