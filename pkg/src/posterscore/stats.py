"""Correlation, tolerance accuracy and inter-annotator agreement statistics."""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateSeries, EmptySeries, LengthMismatch, NoPairableUnits, Undefined
from .scores import BOUNDARY_EPS, DIMENSIONS, ScoreVector

# units x coders; None or NaN marks a missing cell
ReliabilityMatrix = Sequence[Sequence[Optional[float]]]


class DegenerateAgreementWarning(UserWarning):
    """Expected disagreement is zero; alpha reported as 1.0 by convention."""


def _paired(pred, gt, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(pred, dtype=float)
    y = np.asarray(gt, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise LengthMismatch(f"paired series differ in shape: {x.shape} vs {y.shape}")
    if x.size == 0:
        raise EmptySeries("empty series")
    if x.size < min_len:
        raise LengthMismatch(f"need at least {min_len} pairs, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("series contain non-finite values")
    return x, y


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateSeries("constant series has zero variance")
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(float(np.dot(xc, xc)) * float(np.dot(yc, yc))))
    return max(-1.0, min(1.0, r))


def plcc(pred: Sequence[float], gt: Sequence[float]) -> float:
    """Pearson linear correlation (no logistic remapping)."""
    return _pearson(*_paired(pred, gt, 2))


def srcc(pred: Sequence[float], gt: Sequence[float]) -> float:
    """Spearman correlation: Pearson over mean (fractional) ranks."""
    x, y = _paired(pred, gt, 2)
    return _pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def acc_at_k(pred: Sequence[float], gt: Sequence[float], k: float) -> float:
    """Percentage of pairs with absolute error <= k (inclusive)."""
    if not k > 0:
        raise ValueError("k must be > 0")
    x, y = _paired(pred, gt, 1)
    hits = np.abs(x - y) <= k + BOUNDARY_EPS
    return 100.0 * float(np.count_nonzero(hits)) / x.size


def _pairable_units(m: ReliabilityMatrix) -> list[np.ndarray]:
    units = []
    for row in m:
        vals = np.array([np.nan if v is None else float(v) for v in row], dtype=float)
        vals = vals[~np.isnan(vals)]
        if vals.size >= 2:
            units.append(vals)
    return units


def krippendorff_alpha_interval(m: ReliabilityMatrix) -> float:
    """Interval Krippendorff's alpha, 1 - D_o / D_e with squared differences.

    Rows are units, columns are coders. Units with fewer than two values are
    not pairable and are dropped. When all pairable values are identical the
    expected disagreement is zero; 1.0 is returned with a
    DegenerateAgreementWarning.
    """
    units = _pairable_units(m)
    if not units:
        raise Undefined("no unit carries two or more values")
    # sum over ordered pairs c != k of (c - k)^2 equals 2 * m * sum((x - mean)^2)
    d_o = 0.0
    for vals in units:
        centered = vals - vals.mean()
        d_o += 2.0 * float(np.dot(centered, centered)) * vals.size / (vals.size - 1)
    pooled = np.concatenate(units)
    if np.all(pooled == pooled[0]):
        warnings.warn("all pairable values identical; alpha set to 1.0", DegenerateAgreementWarning, stacklevel=2)
        return 1.0
    n = pooled.size
    centered = pooled - pooled.mean()
    d_o /= n
    d_e = 2.0 * n * float(np.dot(centered, centered)) / (n * (n - 1))
    return 1.0 - d_o / d_e


def loose_accuracy(m: ReliabilityMatrix, margin: float = 0.5) -> float:
    """Percentage of within-unit coder pairs whose scores differ by at most ``margin``."""
    units = _pairable_units(m)
    if not units:
        raise NoPairableUnits("no unit carries two or more values")
    within = total = 0
    for vals in units:
        diffs = np.abs(vals[:, None] - vals[None, :])[np.triu_indices(vals.size, k=1)]
        within += int(np.count_nonzero(diffs <= margin + BOUNDARY_EPS))
        total += diffs.size
    return 100.0 * within / total


def mse(pred: ScoreVector, gt: ScoreVector) -> float:
    """Mean squared error over all five dimensions."""
    return math.fsum((pred[d] - gt[d]) ** 2 for d in DIMENSIONS) / len(DIMENSIONS)
