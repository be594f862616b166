"""Subject fidelity from precomputed product-region features.

DINO and CLIP similarities are embedding cosines between the original and
generated product region; LPIPS arrives as an opaque precomputed distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import LengthMismatch, NoRecords, SchemaError, ZeroVector


def cosine_sim(a: Sequence[float], b: Sequence[float]) -> float:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise LengthMismatch(f"vectors differ in shape: {x.shape} vs {y.shape}")
    nx, ny = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVector("cosine undefined for a zero vector")
    return max(-1.0, min(1.0, float(np.dot(x, y)) / (nx * ny)))


@dataclass(frozen=True)
class FeatureRecord:
    case_id: str
    model: str
    dino_ref: tuple[float, ...]
    dino_gen: tuple[float, ...]
    clip_ref: tuple[float, ...]
    clip_gen: tuple[float, ...]
    lpips: float | None = None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FeatureRecord":
        try:
            lpips = data.get("lpips")
            if lpips is not None and (isinstance(lpips, bool) or not isinstance(lpips, (int, float))):
                raise SchemaError("lpips must be a number")
            return cls(
                case_id=str(data["case_id"]),
                model=str(data["model"]),
                dino_ref=_vector(data["dino_ref"]),
                dino_gen=_vector(data["dino_gen"]),
                clip_ref=_vector(data["clip_ref"]),
                clip_gen=_vector(data["clip_gen"]),
                lpips=None if lpips is None else float(lpips),
            )
        except KeyError as exc:
            raise SchemaError(f"feature row missing {exc.args[0]!r}") from None


def _vector(raw) -> tuple[float, ...]:
    if not isinstance(raw, list) or not raw:
        raise SchemaError("feature vectors must be non-empty arrays")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise SchemaError("feature vectors must hold numbers")
    return tuple(float(v) for v in raw)


@dataclass(frozen=True)
class FidelityRow:
    model: str
    n: int
    dino_sim_mean: float
    clip_score_mean: float
    lpips_mean: float | None
    lpips_coverage: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "dino_sim": self.dino_sim_mean,
            "lpips": self.lpips_mean,
            "clip_score": self.clip_score_mean,
            "lpips_coverage": self.lpips_coverage,
        }


def fidelity_row(records: Iterable[FeatureRecord]) -> FidelityRow:
    """Mean DINO/CLIP cosine and mean LPIPS for one model's cases.

    Cases without LPIPS are left out of the LPIPS mean only; ``lpips_coverage``
    counts the cases that contributed.
    """
    ordered = sorted(records, key=lambda r: r.case_id)
    if not ordered:
        raise NoRecords("no feature records")
    models = {r.model for r in ordered}
    if len(models) != 1:
        raise SchemaError(f"fidelity_row expects one model, got {sorted(models)}")
    dino = [cosine_sim(r.dino_ref, r.dino_gen) for r in ordered]
    clip = [cosine_sim(r.clip_ref, r.clip_gen) for r in ordered]
    lpips = [r.lpips for r in ordered if r.lpips is not None]
    return FidelityRow(
        model=ordered[0].model,
        n=len(ordered),
        dino_sim_mean=math.fsum(dino) / len(dino),
        clip_score_mean=math.fsum(clip) / len(clip),
        lpips_mean=math.fsum(lpips) / len(lpips) if lpips else None,
        lpips_coverage=len(lpips),
    )
