"""Seeded synthetic fixtures for tests, demos and the ``synth`` command."""

from __future__ import annotations

import numpy as np

from .dataio import ScoredItem
from .fidelity import FeatureRecord
from .scores import SOURCES, AnnotationRecord, ScoreVector, SourceKind
from .textmetrics import TextCase

BENCH_MODELS = ("flux", "gemini", "gpt4o", "qwen", "seedream")

_CJK_POOL = "新品上市限时特惠买一送一全场包邮正品保障夏季清凉护肤保湿美白抗皱高端精选爆款直降好物推荐"


def _clip1(x: np.ndarray) -> np.ndarray:
    return np.round(np.clip(x, 1.0, 5.0), 1)


def random_vector(rng: np.random.Generator, decimals: int | None = 1) -> ScoreVector:
    v = rng.uniform(1.0, 5.0, size=5)
    if decimals is not None:
        v = np.round(v, decimals)
    return ScoreVector.from_list(float(x) for x in v)


def jitter(rng: np.random.Generator, v: ScoreVector, scale: float = 0.4) -> ScoreVector:
    noisy = _clip1(np.array(v.as_list()) + rng.normal(0.0, scale, size=5))
    return ScoreVector.from_list(float(x) for x in noisy)


def annotation_records(n: int, seed: int = 0) -> list[AnnotationRecord]:
    rng = np.random.default_rng(seed)
    records = []
    for j in range(n):
        src = SOURCES[int(rng.integers(len(SOURCES)))]
        cot_len = int(rng.integers(20, 200))
        cot = "".join(rng.choice(list(_CJK_POOL), size=cot_len))
        records.append(AnnotationRecord(f"img{j:05d}", src, random_vector(rng), {}, cot))
    return records


def predictions_for(records, seed: int = 0, scale: float = 0.4) -> list[ScoredItem]:
    rng = np.random.default_rng(seed)
    return [ScoredItem(r.id, "scorer", jitter(rng, r.scores, scale)) for r in records]


def planted_bottleneck_records(n: int, text_rate: float, seed: int = 0) -> list[AnnotationRecord]:
    """Every record has one sub-dimension strictly lowest and below 3.0.

    Exactly round(n * text_rate) records have Text as that dimension; the rest
    spread over Object, Background and Layout. Other dimensions sit in [3, 5].
    """
    rng = np.random.default_rng(seed)
    n_text = round(n * text_rate)
    lows = np.array([2] * n_text + list(rng.choice([0, 1, 3], size=n - n_text)))
    rng.shuffle(lows)
    records = []
    for j, low in enumerate(lows):
        sub = rng.uniform(3.0, 5.0, size=4)
        sub[low] = rng.uniform(1.0, 2.9)
        overall = rng.uniform(1.0, 5.0)
        vec = ScoreVector(*(float(x) for x in sub), float(overall))
        records.append(AnnotationRecord(f"p{j:05d}", SourceKind.MERCHANT_LQ, vec))
    return records


def independent_records(n: int, seed: int = 0) -> list[AnnotationRecord]:
    rng = np.random.default_rng(seed)
    vals = rng.uniform(1.0, 5.0, size=(n, 5))
    return [
        AnnotationRecord(f"u{j:05d}", SOURCES[j % len(SOURCES)], ScoreVector(*(float(x) for x in row)))
        for j, row in enumerate(vals)
    ]


def _phrases(rng, k):
    return [
        "".join(rng.choice(list(_CJK_POOL), size=int(rng.integers(2, 5)))) for _ in range(k)
    ]


def bench_fixture(seed: int = 0, cases: int = 20, models=BENCH_MODELS) -> dict[str, list]:
    """Human scores, scorer predictions, text cases and features for several models."""
    rng = np.random.default_rng(seed)
    human, scorer, text, features = [], [], [], []
    for model in models:
        bias = rng.normal(0.0, 0.5, size=5)
        for c in range(cases):
            case_id = f"case{c:03d}"
            h = _clip1(rng.uniform(1.5, 4.8, size=5) + bias)
            s = _clip1(h + rng.normal(0.0, 0.5, size=5))
            human.append(ScoredItem(case_id, model, ScoreVector.from_list(float(x) for x in h)))
            scorer.append(ScoredItem(case_id, model, ScoreVector.from_list(float(x) for x in s)))
            gt_ph = _phrases(rng, 4)
            keep = int(rng.integers(0, 5))
            pred_ph = gt_ph[:keep] + _phrases(rng, int(rng.integers(0, 3)))
            gt_text = "".join(gt_ph)
            pred_text = "".join(pred_ph)
            text.append(TextCase(case_id, model, tuple(gt_ph), tuple(pred_ph), gt_text, pred_text))
            ref = rng.normal(size=16)
            gen = ref + rng.normal(0.0, 0.8, size=16)
            cref = rng.normal(size=8)
            cgen = cref + rng.normal(0.0, 0.5, size=8)
            lpips = float(np.round(rng.uniform(0.3, 0.9), 4)) if c % 7 else None
            features.append(
                FeatureRecord(
                    case_id, model,
                    tuple(np.round(ref, 6).tolist()), tuple(np.round(gen, 6).tolist()),
                    tuple(np.round(cref, 6).tolist()), tuple(np.round(cgen, 6).tolist()),
                    lpips,
                )
            )
    return {"human": human, "scorer": scorer, "text": text, "features": features}


def scored_row(item: ScoredItem, id_key: str = "id") -> dict:
    return {id_key: item.id, "model": item.model, "scores": item.scores.to_dict(decimals=None)}


def text_case_row(c: TextCase) -> dict:
    return {
        "case_id": c.case_id,
        "model": c.model,
        "gt_phrases": list(c.gt_phrases),
        "pred_phrases": list(c.pred_phrases),
        "gt_text": c.gt_text,
        "pred_text": c.pred_text,
    }


def feature_row(r: FeatureRecord) -> dict:
    row = {
        "case_id": r.case_id,
        "model": r.model,
        "dino_ref": list(r.dino_ref),
        "dino_gen": list(r.dino_gen),
        "clip_ref": list(r.clip_ref),
        "clip_gen": list(r.clip_gen),
    }
    if r.lpips is not None:
        row["lpips"] = r.lpips
    return row
