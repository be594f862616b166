"""Evaluation and benchmark reports.

Reports are plain dicts with a fixed key order so that serialized output is
byte-stable. Every number shown in a rendered table is also stored, as the
exact rendered string, under the ``rendered`` key of the JSON it came from.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Sequence

from . import __version__
from .config import ToolConfig
from .dataio import ScoredItem
from .errors import DegenerateSeries, SchemaError
from .fidelity import FeatureRecord, fidelity_row
from .scores import DIMENSIONS, AnnotationRecord, Dimension
from .stats import acc_at_k, plcc, srcc
from .textmetrics import TextCase, text_row

EVAL_SCHEMA = "posterscore.eval/1"
BENCH_SCHEMA = "posterscore.bench/1"
NA = "n/a"

# column order of the benchmark table
BENCH_DIMS = (Dimension.OVERALL, Dimension.BACKGROUND, Dimension.OBJECT, Dimension.TEXT, Dimension.LAYOUT)
FIDELITY_COLUMNS = (("dino_sim", "DINO Sim"), ("lpips", "LPIPS"), ("clip_score", "CLIP Score"))
TEXT_COLUMNS = (("phrase_f1", "Phrase F1"), ("char_sim", "Char Sim"), ("lev_sim", "Lev Sim"))


def acc_key(k: float) -> str:
    return f"acc@{float(k)}"


def fmt(value: float | None, decimals: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return NA
    return f"{value:.{decimals}f}"


def pmap(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Order-preserving map, optionally on a thread pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def correlation_block(pred: Sequence[float], gt: Sequence[float], ks: Sequence[float] = ()) -> dict[str, Any]:
    """PLCC/SRCC (and Acc@k for each k) with degenerate cases flagged instead of raised."""
    block: dict[str, Any] = {"n": len(pred)}
    flags = []
    for name, fn in (("plcc", plcc), ("srcc", srcc)):
        if len(pred) < 2:
            block[name] = None
            flags.append(f"{name}:too_few_samples")
            continue
        try:
            block[name] = fn(pred, gt)
        except DegenerateSeries:
            block[name] = None
            flags.append(f"{name}:degenerate_series")
    for k in ks:
        block[acc_key(k)] = acc_at_k(pred, gt, k) if pred else None
    block["degenerate_flags"] = flags
    return block


def _render_eval_cell(block: dict, ks: Sequence[float]) -> dict[str, str]:
    out = {"corr": f"{fmt(block['plcc'], 3)} / {fmt(block['srcc'], 3)}"}
    for k in ks:
        out[acc_key(k)] = fmt(block[acc_key(k)], 1)
    return out


def eval_report(
    preds: Iterable[ScoredItem],
    gts: Iterable[AnnotationRecord],
    cfg: ToolConfig = ToolConfig(),
    workers: int = 1,
    inputs: dict[str, str] | None = None,
) -> dict[str, Any]:
    """Per-model, per-dimension PLCC / SRCC / Acc@k against ground truth."""
    gt_by_id = {r.id: r for r in gts}
    by_model: dict[str, dict[str, ScoredItem]] = {}
    exceptions = []
    for item in preds:
        if item.id not in gt_by_id:
            exceptions.append({"model": item.model, "id": item.id, "reason": "no_ground_truth"})
            continue
        by_model.setdefault(item.model, {})[item.id] = item
    models = sorted(by_model)
    for model in models:
        for gid in sorted(set(gt_by_id) - set(by_model[model])):
            exceptions.append({"model": model, "id": gid, "reason": "no_prediction"})

    def work(task):
        model, dim = task
        ids = sorted(by_model[model])
        pred = [by_model[model][i].scores[dim] for i in ids]
        gt = [gt_by_id[i].scores[dim] for i in ids]
        return correlation_block(pred, gt, cfg.ks)

    tasks = [(m, d) for m in models for d in DIMENSIONS]
    blocks = dict(zip(tasks, pmap(work, tasks, workers)))

    model_blocks = {}
    for model in models:
        dims = {d.value: blocks[(model, d)] for d in DIMENSIONS}
        model_blocks[model] = {
            "n": len(by_model[model]),
            "dimensions": dims,
            "rendered": {d: _render_eval_cell(b, cfg.ks) for d, b in dims.items()},
        }
    return {
        "schema": EVAL_SCHEMA,
        "version": __version__,
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "inputs": dict(sorted((inputs or {}).items())),
        "models": model_blocks,
        "exceptions": exceptions,
    }


def render_eval_markdown(report: dict[str, Any]) -> str:
    ks = report["config"]["ks"]
    header = "| Model | " + " | ".join(d.label for d in DIMENSIONS) + " |"
    sep = "|---" * (len(DIMENSIONS) + 1) + "|"
    lines = ["PLCC / SRCC", "", header, sep]
    for model, block in report["models"].items():
        cells = [block["rendered"][d.value]["corr"] for d in DIMENSIONS]
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    for k in ks:
        lines += ["", f"Acc@{float(k)} (%)", "", header, sep]
        for model, block in report["models"].items():
            cells = [block["rendered"][d.value][acc_key(k)] for d in DIMENSIONS]
            lines.append(f"| {model} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_eval_csv(report: dict[str, Any]) -> str:
    ks = report["config"]["ks"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "dimension", "n", "plcc", "srcc", *[acc_key(k) for k in ks]])
    for model, block in report["models"].items():
        for d in DIMENSIONS:
            b = block["dimensions"][d.value]
            r = block["rendered"][d.value]
            p, s = r["corr"].split(" / ")
            w.writerow([model, d.value, b["n"], p, s, *[r[acc_key(k)] for k in ks]])
    return buf.getvalue()


# ---------------------------------------------------------------- benchmark


def _mean_scores(items: Sequence[ScoredItem]) -> dict[str, Any]:
    return {
        "n": len(items),
        "means": {d.value: math.fsum(i.scores[d] for i in items) / len(items) for d in DIMENSIONS},
    }


def _group(items: Iterable, key: Callable) -> dict[str, list]:
    out: dict[str, list] = {}
    for it in items:
        out.setdefault(key(it), []).append(it)
    return out


def _check_unique(items: Sequence[ScoredItem], name: str) -> None:
    seen = set()
    for it in items:
        if (it.model, it.id) in seen:
            raise SchemaError(f"{name}: duplicate case {it.id!r} for model {it.model!r}")
        seen.add((it.model, it.id))


def _agreement(human: Sequence[ScoredItem], scorer: Sequence[ScoredItem], ks: Sequence[float] = ()) -> dict[str, Any]:
    scorer_by_key = {(s.model, s.id): s for s in scorer}
    pairs = sorted(
        ((h.model, h.id), h, scorer_by_key[(h.model, h.id)]) for h in human if (h.model, h.id) in scorer_by_key
    )
    dims = {}
    for d in DIMENSIONS:
        hv = [h.scores[d] for _, h, _ in pairs]
        sv = [s.scores[d] for _, _, s in pairs]
        dims[d.value] = correlation_block(sv, hv, ks)
    return {"n_pairs": len(pairs), "dimensions": dims}


def bench_report(
    human: Sequence[ScoredItem] | None = None,
    scorer: Sequence[ScoredItem] | None = None,
    text: Sequence[TextCase] | None = None,
    features: Sequence[FeatureRecord] | None = None,
    cfg: ToolConfig = ToolConfig(),
    workers: int = 1,
    inputs: dict[str, str] | None = None,
) -> dict[str, Any]:
    """Merge human scores, scorer predictions, text and fidelity metrics per model.

    Blocks that are not supplied are omitted from the merged JSON and shown
    as ``n/a`` in the tables; nothing is imputed.
    """
    if not any(x is not None for x in (human, scorer, text, features)):
        raise SchemaError("bench report needs at least one input block")
    for items, name in ((human, "human"), (scorer, "scorer")):
        if items is not None:
            _check_unique(items, name)
    human_g = _group(human or [], lambda i: i.model)
    scorer_g = _group(scorer or [], lambda i: i.model)
    text_g = _group(text or [], lambda c: c.model)
    feat_g = _group(features or [], lambda r: r.model)
    models = sorted(set(human_g) | set(scorer_g) | set(text_g) | set(feat_g))

    def work(model):
        block: dict[str, Any] = {"schema": BENCH_SCHEMA, "model": model}
        if model in human_g:
            block["human"] = _mean_scores(human_g[model])
        if model in scorer_g:
            block["scorer"] = _mean_scores(scorer_g[model])
        if model in human_g and model in scorer_g:
            block["agreement"] = _agreement(human_g[model], scorer_g[model], cfg.ks)
        if model in text_g:
            block["text"] = text_row(text_g[model])
        if model in feat_g:
            block["fidelity"] = fidelity_row(feat_g[model]).to_dict()
        block["rendered"] = _render_bench_row(block)
        return block

    per_model = dict(zip(models, pmap(work, models, workers)))
    summary: dict[str, Any] = {
        "schema": BENCH_SCHEMA,
        "version": __version__,
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
        "inputs": dict(sorted((inputs or {}).items())),
        "models": models,
        "blocks": {
            "human": human is not None,
            "scorer": scorer is not None,
            "text": text is not None,
            "fidelity": features is not None,
        },
    }
    if human is not None and scorer is not None:
        summary["agreement"] = _agreement(human, scorer, cfg.ks)
    for block in per_model.values():
        block["version"] = __version__
        block["config_hash"] = summary["config_hash"]
    return {"summary": summary, "models": per_model}


def _render_bench_row(block: dict[str, Any]) -> dict[str, str]:
    out = {}
    for d in BENCH_DIMS:
        for side in ("human", "scorer"):
            value = block[side]["means"][d.value] if side in block else None
            out[f"{d.value}.{side}"] = fmt(value, 2)
    for key, _ in FIDELITY_COLUMNS:
        out[key] = fmt(block["fidelity"][key], 2) if "fidelity" in block else NA
    for key, _ in TEXT_COLUMNS:
        out[key] = fmt(block["text"][key], 2) if "text" in block else NA
    return out


def render_bench_markdown(report: dict[str, Any]) -> str:
    models = report["models"]
    head = ["Model"] + [f"{d.label} {side}" for d in BENCH_DIMS for side in ("Human", "Scorer")]
    lines = ["| " + " | ".join(head) + " |", "|---" * len(head) + "|"]
    for model, block in models.items():
        r = block["rendered"]
        cells = [r[f"{d.value}.{side}"] for d in BENCH_DIMS for side in ("human", "scorer")]
        lines.append(f"| {model} | " + " | ".join(cells) + " |")
    head2 = ["Model"] + [label for _, label in FIDELITY_COLUMNS + TEXT_COLUMNS]
    lines += ["", "| " + " | ".join(head2) + " |", "|---" * len(head2) + "|"]
    for model, block in models.items():
        r = block["rendered"]
        lines.append(f"| {model} | " + " | ".join(r[k] for k, _ in FIDELITY_COLUMNS + TEXT_COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def render_bench_csv(report: dict[str, Any]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = [f"{d.value}.{side}" for d in BENCH_DIMS for side in ("human", "scorer")]
    keys += [k for k, _ in FIDELITY_COLUMNS + TEXT_COLUMNS]
    w.writerow(["model", *keys])
    for model, block in report["models"].items():
        w.writerow([model, *[block["rendered"][k] for k in keys]])
    return buf.getvalue()
