"""Command-line entry point: ``posterscore <command> ...``.

Exit codes: 0 success, 1 fatal IO/schema error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from pathlib import Path
from typing import Any

from . import __version__
from . import analysis, hardset, report, stats, synth
from .config import OUTPUT_FORMATS, ToolConfig, load_config
from .dataio import (
    BadLine,
    dump_annotations,
    dumps,
    ensure_dir,
    file_digest,
    iter_jsonl,
    load_annotations,
    load_scored,
    read_jsonl,
    write_json,
    write_jsonl,
)
from .errors import ConfigError, MissingGroundTruth, PosterScoreError, SchemaError
from .fidelity import FeatureRecord, fidelity_row
from .parsing import RetryPolicy, Verdict, attempt_parse, format_output, parse_output
from .reward import total_reward
from .scores import DIMENSIONS, SUB_DIMENSIONS, ScoreVector, load_taxonomy
from .textmetrics import TEXT_METRICS, TextCase, text_row

log = logging.getLogger("posterscore")

EXIT_OK, EXIT_FATAL, EXIT_CONFIG = 0, 1, 2


# ------------------------------------------------------------------ helpers


def _effective_config(args) -> ToolConfig:
    cfg = load_config(args.config)
    reward_over = {}
    for name in ("tau", "lambda_score", "alpha", "tier_penalty", "lambda_fmt"):
        value = getattr(args, name, None)
        if value is not None:
            reward_over[name] = value
    return cfg.with_overrides(
        reward=reward_over or None,
        output_format=args.format,
        ks=tuple(args.ks) if getattr(args, "ks", None) else None,
        weakest_link_threshold=getattr(args, "threshold", None),
        max_attempts=getattr(args, "max_attempts", None),
        remainder_policy="fill" if getattr(args, "fill_remainder", False) else None,
        selection_mode="global" if getattr(args, "global_", False) else None,
    )


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(args, obj: Any) -> None:
    _emit(args, json.dumps(obj, ensure_ascii=False, indent=2, allow_nan=False) + "\n")


def _summary(args, obj: Any) -> None:
    # keep stdout clean for data when results go there
    stream = sys.stdout if args.out else sys.stderr
    stream.write(json.dumps(obj, ensure_ascii=False, indent=2) + "\n")


def _safe_name(model: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", model) or "_"


def _rows_with_id(path, exceptions: list, required=("id",)):
    for lineno, row in iter_jsonl(path):
        if isinstance(row, BadLine):
            exceptions.append({"line": lineno, "reason": row.error})
            continue
        if not isinstance(row, dict) or any(k not in row for k in required):
            exceptions.append({"line": lineno, "reason": f"expected an object with keys {list(required)}"})
            continue
        yield lineno, row


def _parse_raw(raw, policy: RetryPolicy):
    """A string is a single generation; a list holds successive retry attempts."""
    if isinstance(raw, list):
        attempts = [str(r) for r in raw][: policy.max_attempts]
        if not attempts:
            return parse_output(""), 0
        it = iter(attempts)
        return attempt_parse(lambda: next(it), RetryPolicy(len(attempts)))
    return parse_output(raw if isinstance(raw, str) else json.dumps(raw)), 1


# ----------------------------------------------------------------- commands


def cmd_parse(args, cfg: ToolConfig) -> int:
    policy = RetryPolicy(cfg.max_attempts)
    exceptions: list = []
    counts = {v.value: 0 for v in Verdict}
    out_rows = []
    for lineno, row in _rows_with_id(args.input, exceptions, ("id", "raw")):
        output, used = _parse_raw(row["raw"], policy)
        counts[output.verdict.value] += 1
        rec: dict[str, Any] = {"id": row["id"], "verdict": output.verdict.value, "attempts": used}
        if output.scores is not None:
            rec["scores"] = output.scores.to_dict(decimals=None)
        out_rows.append(rec)
    _write_rows(args, out_rows)
    _summary(args, {"total": len(out_rows), "counts": counts, "exceptions": exceptions})
    return EXIT_OK


def _write_rows(args, rows) -> None:
    if args.out:
        write_jsonl(args.out, rows)
    else:
        for row in rows:
            sys.stdout.write(dumps(row) + "\n")


def cmd_reward(args, cfg: ToolConfig) -> int:
    policy = RetryPolicy(cfg.max_attempts)
    gt_lookup = {r.id: r.scores for r in load_annotations(args.gt)} if args.gt else {}
    exceptions: list = []
    out_rows = []
    for lineno, row in _rows_with_id(args.input, exceptions, ("id", "raw")):
        if "gt_scores" in row:
            try:
                gt = ScoreVector.from_mapping(row["gt_scores"])
            except ValueError as exc:
                raise SchemaError(f"{args.input}:{lineno}: gt_scores: {exc}") from None
        elif row["id"] in gt_lookup:
            gt = gt_lookup[row["id"]]
        else:
            raise MissingGroundTruth(row["id"])
        output, _ = _parse_raw(row["raw"], policy)
        out_rows.append({"id": row["id"], **total_reward(output, gt, cfg.reward).to_dict()})
    _write_rows(args, out_rows)
    totals = [r["total"] for r in out_rows]
    summary = {
        "n": len(totals),
        "mean": math.fsum(totals) / len(totals) if totals else None,
        "min": min(totals, default=None),
        "max": max(totals, default=None),
        "exceptions": exceptions,
    }
    _summary(args, summary)
    return EXIT_OK


def cmd_eval(args, cfg: ToolConfig) -> int:
    preds = load_scored(args.pred)
    gts = load_annotations(args.gt)
    inputs = {"pred": file_digest(args.pred), "gt": file_digest(args.gt)}
    rep = report.eval_report(preds, gts, cfg, workers=args.workers, inputs=inputs)
    if cfg.output_format == "md":
        _emit(args, report.render_eval_markdown(rep))
    elif cfg.output_format == "csv":
        _emit(args, report.render_eval_csv(rep))
    else:
        _emit_json(args, rep)
    return EXIT_OK


def cmd_select_hard(args, cfg: ToolConfig) -> int:
    preds = {p.id: p.scores for p in load_scored(args.pred)}
    gts = load_annotations(args.gt)
    errors = hardset.compute_errors(preds, gts)
    plan = hardset.plan_quotas(hardset.populations_of(errors), args.k)
    if cfg.selection_mode == "global":
        selected = hardset.select_global(errors, args.k)
    else:
        selected = hardset.select_hard(errors, plan, fill_remainder=cfg.remainder_policy == "fill")
    _emit_json(
        args,
        {
            "selected": selected,
            "plan": plan.to_dict(),
            "mode": cfg.selection_mode,
            "remainder_policy": cfg.remainder_policy,
        },
    )
    return EXIT_OK


def _agreement_stats(path, margin: float) -> dict[str, Any]:
    """Per-dimension alpha and loose accuracy from rows ``{id, coder, scores}``."""
    units: dict[str, dict[str, dict]] = {}
    coders: set[str] = set()
    for lineno, row in enumerate(read_jsonl(path), 1):
        if not all(k in row for k in ("id", "coder", "scores")) or not isinstance(row["scores"], dict):
            raise SchemaError(f"{path}: row {lineno}: expected keys id, coder, scores")
        uid, coder = str(row["id"]), str(row["coder"])
        coders.add(coder)
        units.setdefault(uid, {})[coder] = row["scores"]
    coder_list = sorted(coders)
    out = {}
    for d in DIMENSIONS:
        matrix = [[units[u].get(c, {}).get(d.value) for c in coder_list] for u in sorted(units)]
        block: dict[str, Any] = {}
        try:
            block["alpha"] = stats.krippendorff_alpha_interval(matrix)
        except stats.Undefined:
            block["alpha"] = None
        try:
            block["loose_acc"] = stats.loose_accuracy(matrix, margin)
        except stats.NoPairableUnits:
            block["loose_acc"] = None
        out[d.value] = block
    return {"units": len(units), "coders": coder_list, "dimensions": out}


def cmd_stats(args, cfg: ToolConfig) -> int:
    taxonomy = load_taxonomy(cfg.taxonomy_path) if cfg.validate_tags else None
    records = load_annotations(args.gt, taxonomy=taxonomy)
    if not records:
        raise SchemaError("no annotation records")
    corr = analysis.correlation_matrix(records) if len(records) >= 2 else None
    wl = analysis.weakest_link(records, cfg.weakest_link_threshold)
    dists = {d: analysis.score_distribution(records, d, args.bins) for d in DIMENSIONS}
    cot = analysis.cot_length_distribution(records, args.bins)
    means = analysis.per_source_means(records)
    result: dict[str, Any] = {
        "version": __version__,
        "config_hash": cfg.digest(),
        "inputs": {"gt": file_digest(args.gt)},
        "n": len(records),
        "correlation": None
        if corr is None
        else {
            "dims": [d.value for d in corr.dims],
            "matrix": [list(row) for row in corr.values],
            "mean_offdiag": corr.mean_offdiag,
            "undefined_pairs": [[a.value, b.value] for a, b in corr.undefined_pairs],
        },
        "weakest_link": wl.to_dict(),
        "distributions": {d.value: s.to_dict() for d, s in dists.items()},
        "cot_length": cot.to_dict(),
        "per_source": {
            "means": {s.value: {d.value: v for d, v in m.items()} for s, m in means.means.items()},
            "counts": {s.value: c for s, c in means.counts.items()},
            "missing": [s.value for s in means.missing],
        },
    }
    if args.ratings:
        result["agreement"] = _agreement_stats(args.ratings, cfg.loose_margin)
    if args.cot_edits:
        rates = []
        for lineno, row in enumerate(read_jsonl(args.cot_edits), 1):
            if not isinstance(row.get("original"), str) or not isinstance(row.get("edited"), str):
                raise SchemaError(f"{args.cot_edits}: row {lineno}: expected string keys original, edited")
            rates.append(analysis.cot_edit_rate(row["original"], row["edited"]))
        result["cot_edit_rate"] = {
            "n": len(rates),
            "mean": math.fsum(rates) / len(rates) if rates else None,
            "max": max(rates, default=None),
        }

    if cfg.output_format == "csv":
        if not args.out:
            raise ConfigError("--format csv for stats writes several files; pass --out DIR")
        out = ensure_dir(args.out)
        for d, s in dists.items():
            analysis.write_histogram_csv(out / f"hist_{d.value}.csv", s)
        analysis.write_histogram_csv(out / "hist_cot_length.csv", cot)
        if corr is not None:
            analysis.write_matrix_csv(out / "correlation.csv", corr)
        analysis.write_source_means_csv(out / "per_source.csv", means)
    elif cfg.output_format == "md":
        _emit(args, _stats_markdown(result))
    else:
        _emit_json(args, result)
    return EXIT_OK


def _stats_markdown(result: dict[str, Any]) -> str:
    lines = [f"records: {result['n']}", ""]
    corr = result["correlation"]
    if corr is not None:
        lines += ["| | " + " | ".join(corr["dims"]) + " |", "|---" * (len(corr["dims"]) + 1) + "|"]
        for dim, row in zip(corr["dims"], corr["matrix"]):
            lines.append(f"| {dim} | " + " | ".join(report.fmt(v, 3) for v in row) + " |")
        lines += ["", f"mean off-diagonal: {report.fmt(corr['mean_offdiag'], 3)}", ""]
    wl = result["weakest_link"]
    lines.append(f"weakest link (< {wl['threshold']}): {wl['flagged']} flagged, {wl['ties']} ties")
    for d in SUB_DIMENSIONS:
        lines.append(f"- {d.value}: {wl['counts'][d.value]} ({report.fmt(wl['percent'][d.value], 1)}%)")
    return "\n".join(lines) + "\n"


def cmd_text_metrics(args, cfg: ToolConfig) -> int:
    cases = [TextCase.from_dict(r) for r in read_jsonl(args.input)]
    cases.sort(key=lambda c: (c.model, c.case_id))
    per_case = [{"case_id": c.case_id, "model": c.model, **c.scores()} for c in cases]
    grouped: dict[str, list[TextCase]] = {}
    for c in cases:
        grouped.setdefault(c.model, []).append(c)
    models = {m: text_row(cs) for m, cs in sorted(grouped.items())}
    if cfg.output_format in ("csv", "md"):
        header = ["model", "n", *TEXT_METRICS]
        if cfg.output_format == "csv":
            lines = [",".join(header)]
            lines += [",".join([m, str(r["n"]), *[report.fmt(r[k], 6) for k in TEXT_METRICS]]) for m, r in models.items()]
        else:
            lines = ["| " + " | ".join(header) + " |", "|---" * len(header) + "|"]
            lines += [
                f"| {m} | {r['n']} | " + " | ".join(report.fmt(r[k], 2) for k in TEXT_METRICS) + " |"
                for m, r in models.items()
            ]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit_json(args, {"version": __version__, "models": models, "cases": per_case})
    return EXIT_OK


def cmd_fidelity(args, cfg: ToolConfig) -> int:
    records = [FeatureRecord.from_dict(r) for r in read_jsonl(args.input)]
    grouped: dict[str, list[FeatureRecord]] = {}
    for r in records:
        grouped.setdefault(r.model, []).append(r)
    models = {m: fidelity_row(rs).to_dict() for m, rs in sorted(grouped.items())}
    if cfg.output_format in ("csv", "md"):
        cols = ["dino_sim", "lpips", "clip_score"]
        if cfg.output_format == "csv":
            lines = [",".join(["model", "n", *cols, "lpips_coverage"])]
            lines += [
                ",".join([m, str(r["n"]), *[report.fmt(r[c], 6) for c in cols], str(r["lpips_coverage"])])
                for m, r in models.items()
            ]
        else:
            lines = ["| model | n | DINO Sim | LPIPS | CLIP Score |", "|---|---|---|---|---|"]
            lines += [f"| {m} | {r['n']} | " + " | ".join(report.fmt(r[c], 2) for c in cols) + " |" for m, r in models.items()]
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit_json(args, {"version": __version__, "models": models})
    return EXIT_OK


def cmd_bench_report(args, cfg: ToolConfig) -> int:
    if not any((args.human, args.model_scores, args.text, args.fidelity)):
        raise SchemaError("bench-report needs at least one of --human, --model-scores, --text, --fidelity")
    if not args.out:
        raise ConfigError("bench-report writes a directory; pass --out DIR")
    human = load_scored(args.human, id_key="case_id") if args.human else None
    scorer = load_scored(args.model_scores, id_key="case_id") if args.model_scores else None
    text = [TextCase.from_dict(r) for r in read_jsonl(args.text)] if args.text else None
    feats = [FeatureRecord.from_dict(r) for r in read_jsonl(args.fidelity)] if args.fidelity else None
    inputs = {
        name: file_digest(path)
        for name, path in (("human", args.human), ("model_scores", args.model_scores), ("text", args.text), ("fidelity", args.fidelity))
        if path
    }
    rep = report.bench_report(human, scorer, text, feats, cfg, workers=args.workers, inputs=inputs)
    out = ensure_dir(args.out)
    models_dir = ensure_dir(out / "models")
    for model, block in rep["models"].items():
        write_json(models_dir / f"{_safe_name(model)}.json", block)
    write_json(out / "summary.json", rep["summary"])
    if cfg.output_format == "csv":
        (out / "table.csv").write_text(report.render_bench_csv(rep), encoding="utf-8")
    else:
        (out / "table.md").write_text(report.render_bench_markdown(rep), encoding="utf-8")
    sys.stdout.write(f"wrote {len(rep['models'])} model reports to {out}\n")
    return EXIT_OK


def cmd_synth(args, cfg: ToolConfig) -> int:
    if not args.out:
        raise ConfigError("synth writes a directory; pass --out DIR")
    out = ensure_dir(args.out)
    records = synth.annotation_records(args.records, seed=args.seed)
    dump_annotations(out / "annotations.jsonl", records)
    preds = synth.predictions_for(records, seed=args.seed + 1)
    write_jsonl(out / "predictions.jsonl", (synth.scored_row(p) for p in preds))
    write_jsonl(
        out / "generations.jsonl",
        ({"id": p.id, "raw": format_output(p.scores)} for p in preds),
    )
    fx = synth.bench_fixture(seed=args.seed, cases=args.cases)
    write_jsonl(out / "human.jsonl", (synth.scored_row(i, "case_id") for i in fx["human"]))
    write_jsonl(out / "model_scores.jsonl", (synth.scored_row(i, "case_id") for i in fx["scorer"]))
    write_jsonl(out / "text.jsonl", (synth.text_case_row(c) for c in fx["text"]))
    write_jsonl(out / "features.jsonl", (synth.feature_row(r) for r in fx["features"]))
    sys.stdout.write(f"wrote synthetic fixture to {out}\n")
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON or TOML tool config")
    common.add_argument("--out", metavar="PATH", help="output file (or directory for multi-file outputs)")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="output format (default from config: json)")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic fixture generation only")
    common.add_argument("--workers", type=int, default=1, help="worker threads; output does not depend on it")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="posterscore", description="Poster quality scoring, reward and evaluation toolbox.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="parse raw generations into verdicts and scores")
    s.add_argument("--in", dest="input", required=True, metavar="PATH", help="JSONL of {id, raw}")
    s.add_argument("--max-attempts", type=int)
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("reward", parents=[common], help="compute reward breakdowns")
    s.add_argument("--in", dest="input", required=True, metavar="PATH", help="JSONL of {id, raw, gt_scores?}")
    s.add_argument("--gt", metavar="PATH", help="annotation JSONL used when a row has no gt_scores")
    s.add_argument("--max-attempts", type=int)
    for name in ("tau", "lambda-score", "alpha", "tier-penalty", "lambda-fmt"):
        s.add_argument(f"--{name}", type=float)
    s.set_defaults(func=cmd_reward)

    s = sub.add_parser("eval", parents=[common], help="PLCC / SRCC / Acc@k against ground truth")
    s.add_argument("--pred", required=True, metavar="PATH", help="JSONL of {id, model?, scores}")
    s.add_argument("--gt", required=True, metavar="PATH", help="annotation JSONL")
    s.add_argument("--ks", type=float, nargs="+", metavar="K")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("select-hard", parents=[common], help="source-stratified hard subset")
    s.add_argument("--pred", required=True, metavar="PATH")
    s.add_argument("--gt", required=True, metavar="PATH")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--global", dest="global_", action="store_true", help="unstratified global top-K")
    s.add_argument("--fill-remainder", action="store_true", help="top up the floor remainder to exactly K")
    s.set_defaults(func=cmd_select_hard)

    s = sub.add_parser("stats", parents=[common], help="dataset statistics")
    s.add_argument("--gt", required=True, metavar="PATH", help="annotation JSONL")
    s.add_argument("--ratings", metavar="PATH", help="JSONL of {id, coder, scores} for agreement")
    s.add_argument("--cot-edits", metavar="PATH", help="JSONL of {id, original, edited}")
    s.add_argument("--bins", type=int, default=8)
    s.add_argument("--threshold", type=float, help="weakest-link threshold")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("text-metrics", parents=[common], help="phrase F1 and character similarities")
    s.add_argument("--in", dest="input", required=True, metavar="PATH")
    s.set_defaults(func=cmd_text_metrics)

    s = sub.add_parser("fidelity", parents=[common], help="subject fidelity from precomputed features")
    s.add_argument("--in", dest="input", required=True, metavar="PATH")
    s.set_defaults(func=cmd_fidelity)

    s = sub.add_parser("bench-report", parents=[common], help="merged per-model benchmark report")
    s.add_argument("--human", metavar="PATH")
    s.add_argument("--model-scores", metavar="PATH")
    s.add_argument("--text", metavar="PATH")
    s.add_argument("--fidelity", metavar="PATH")
    s.set_defaults(func=cmd_bench_report)

    s = sub.add_parser("synth", parents=[common], help="write a seeded synthetic fixture")
    s.add_argument("--records", type=int, default=200)
    s.add_argument("--cases", type=int, default=20)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        cfg = _effective_config(args)
    except (ConfigError, ValueError) as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        return args.func(args, cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (OSError, PosterScoreError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
