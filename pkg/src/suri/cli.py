"""Command-line interface.

Every command writes a JSON report that embeds the fully resolved
configuration under ``"config"``; ``suri --replay REPORT`` reruns it and
reproduces the report byte for byte.

Exit codes: 0 success, 2 invalid flags, 3 data or estimator error,
4 exhaustive-search guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    DataError,
    PreprocessConfig,
    binarize_heart_labels,
    load_csv,
    load_eeg_recordings,
    preprocess,
    raw_label_values,
    write_csv,
)
from .evaluation import DEFAULT_FOLDS, DEFAULT_K_NN, evaluate_curve
from .exhaustive import MAX_FEATURES, SearchTooLarge, exhaustive_search, top_frequency, uri_frequency_correlation
from .mi import DEFAULT_K, EstimatorError, JointMICache
from .relevance import DEFAULT_THRESHOLD, compute_uri_all, uri_fraction
from .selectors import BENCHMARK_BETAS, DEFAULT_BETA, METHODS, SelectionTrace, make_scorer, greedy_select

log = logging.getLogger("suri")

THREADS_ENV = "SURI_THREADS"
EXIT_USAGE, EXIT_DATA, EXIT_GUARD = 2, 3, 4


class UsageError(Exception):
    pass


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suri", description="Mutual-information feature selection.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--replay", metavar="REPORT", help="rerun the configuration embedded in a JSON report")
    parser.add_argument("--threads", type=int, default=_default_threads(),
                        help=f"worker threads for neighbour search (default ${THREADS_ENV} or 1)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def data_args(p, estimator=True):
        p.add_argument("--input", required=True, help="CSV file")
        p.add_argument("--label", required=True, help="label column name or index")
        p.add_argument("--no-header", action="store_true", help="CSV has no header row")
        p.add_argument("--drop-missing", action="store_true", help="drop rows with missing cells instead of failing")
        p.add_argument("--binarize-heart", action="store_true", help="map heart-disease labels 0..4 to 0/1")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="report path (default: stdout)")
        if estimator:
            p.add_argument("--no-standardize", action="store_true")
            p.add_argument("--jitter", type=float, default=1e-10, help="tie-breaking noise, fraction of feature std")
            p.add_argument("--k", type=int, default=DEFAULT_K, help="estimator neighbour count")

    def cv_args(p):
        p.add_argument("--k-nn", type=int, default=DEFAULT_K_NN)
        p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)

    p = sub.add_parser("prep-eeg", help="summarise raw EEG recordings into a feature CSV")
    p.add_argument("--input", required=True, nargs="+", help="recording CSVs (rows=channels) or directories")
    p.add_argument("--labels", required=True, help="CSV with columns file,label")
    p.add_argument("--output", required=True, help="feature CSV to write; a .json report is written beside it")

    p = sub.add_parser("uri", help="per-feature unique relevant information")
    data_args(p)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)

    p = sub.add_parser("select", help="greedy feature selection")
    data_args(p)
    p.add_argument("--method", choices=METHODS, default="suri")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--m", type=int, help="number of features to select (default: all)")

    p = sub.add_parser("eval", help="cross-validated KNN accuracy over selection prefixes")
    data_args(p)
    cv_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trace", help="selection report or trace JSON to evaluate")
    src.add_argument("--method", choices=METHODS, help="select with this method, then evaluate")
    src.add_argument("--benchmark", action="store_true", help="compare all methods and SURI betas")
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--m", type=int, help="selection length (default: all features)")
    p.add_argument("--curve-csv", help="also write accuracy curve(s) as CSV")

    p = sub.add_parser("exhaustive", help="rank every feature subset by CV accuracy")
    data_args(p)
    cv_args(p)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--max-n", type=int, default=MAX_FEATURES)
    p.add_argument("--freq-output", help="frequency table JSON (default: OUTPUT with .freq.json)")

    p = sub.add_parser("mi", help="joint MI of feature subsets with the label")
    data_args(p)
    p.add_argument("--subset", action="append", required=True,
                   help="comma-separated feature indices; repeat for several subsets")
    return parser


# -- helpers -----------------------------------------------------------------


def _load(cfg: dict):
    label = cfg["label"]
    d = load_csv(cfg["input"], label, has_header=not cfg["no_header"], drop_missing=cfg["drop_missing"])
    if cfg["binarize_heart"]:
        d = d.with_labels(binarize_heart_labels(raw_label_values(d)), {0: "0", 1: "1"})
    return d


def _estimation_data(cfg: dict, d):
    pre = PreprocessConfig(standardize=not cfg["no_standardize"], jitter_amplitude=cfg["jitter"], rng_seed=cfg["seed"])
    return preprocess(d, pre)


def _data_summary(d) -> dict:
    return {
        "n_samples": d.n_samples,
        "n_features": d.n_features,
        "feature_names": list(d.feature_names),
        "class_counts": np.bincount(d.labels).tolist(),
        "label_map": {str(k): v for k, v in d.label_map.items()},
        "categorical_maps": d.categorical_maps,
    }


def _write_json(obj, path) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(cfg: dict, result: dict, d=None) -> dict:
    out = {"suri_version": __version__, "command": cfg["command"], "config": cfg}
    if d is not None:
        out["data"] = _data_summary(d)
    out["result"] = result
    return out


def _selection_length(cfg: dict, n: int) -> int:
    m = cfg.get("m") or n
    if not 1 <= m <= n:
        raise UsageError(f"--m must be between 1 and {n}")
    return m


def _check_beta(beta: float) -> None:
    if not 0.0 <= beta <= 1.0:
        raise UsageError("--beta must lie in [0, 1]")


# -- commands ------------------------------------------------------------------


def cmd_prep_eeg(cfg: dict) -> dict:
    files = []
    for item in cfg["input"]:
        p = Path(item)
        files.extend(sorted(p.glob("*.csv")) if p.is_dir() else [p])
    with open(cfg["labels"], newline="", encoding="utf-8") as fh:
        mapping = {row["file"]: row["label"] for row in csv.DictReader(fh)}
    labels = []
    for f in files:
        key = f.name if f.name in mapping else str(f)
        if key not in mapping:
            raise DataError(f"no label for recording {f}")
        labels.append(int(mapping[key]))
    d = load_eeg_recordings(files, labels)
    write_csv(d, cfg["output"])
    report = _report(cfg, {"recordings": [str(f) for f in files], "n_channels": d.n_features // 6}, d)
    _write_json(report, str(Path(cfg["output"]).with_suffix(".json")))
    return report


def cmd_uri(cfg: dict) -> dict:
    d = _load(cfg)
    est = _estimation_data(cfg, d)
    table = compute_uri_all(est, cfg["k"], cfg["threshold"], cache=JointMICache(est, cfg["k"], cfg["threads"]))
    result = {
        "k": table.k,
        "threshold": table.threshold,
        "full_mi": table.full_mi,
        "uri_fraction": uri_fraction(table),
        "features": table.to_records(),
    }
    report = _report(cfg, result, d)
    _write_json(report, cfg["output"])
    return report


def _run_selection(est, cfg, method, beta, cache, table):
    scorer = make_scorer(est, method, cfg["k"], beta, cache=cache, uri_table=table)
    return greedy_select(est.n_features, scorer, _selection_length(cfg, est.n_features), feature_names=est.feature_names)


def cmd_select(cfg: dict) -> dict:
    _check_beta(cfg["beta"])
    d = _load(cfg)
    est = _estimation_data(cfg, d)
    cache = JointMICache(est, cfg["k"], cfg["threads"])
    table = compute_uri_all(est, cfg["k"], cache=cache)
    trace = _run_selection(est, cfg, cfg["method"], cfg["beta"], cache, table)
    report = _report(cfg, trace.to_dict(), d)
    _write_json(report, cfg["output"])
    return report


def _load_trace(path, names) -> SelectionTrace:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if "result" in obj:
        obj = obj["result"]
    return SelectionTrace.from_dict(obj, names)


def _peak_label(ev) -> str:
    return f"{100 * ev.peak_accuracy:.1f}% ({ev.peak_size})"


def cmd_eval(cfg: dict) -> dict:
    _check_beta(cfg["beta"])
    d = _load(cfg)
    evals = []
    if cfg["trace"]:
        traces = [_load_trace(cfg["trace"], d.feature_names)]
    else:
        est = _estimation_data(cfg, d)
        cache = JointMICache(est, cfg["k"], cfg["threads"])
        table = compute_uri_all(est, cfg["k"], cache=cache)
        if cfg["benchmark"]:
            plan = [(m, None) for m in ("gsa", "mim", "jmi", "jmim")] + [("suri", b) for b in BENCHMARK_BETAS]
        else:
            plan = [(cfg["method"], cfg["beta"])]
        traces = [_run_selection(est, cfg, m, b, cache, table) for m, b in plan]
    for trace in traces:
        ev = evaluate_curve(d, trace, cfg["folds"], cfg["k_nn"], cfg["seed"])
        evals.append((trace, ev))

    rows = []
    for trace, ev in evals:
        name = trace.method.upper() if trace.beta is None else f"{trace.method.upper()}(beta={trace.beta})"
        rows.append({
            "method": name,
            "trace": trace.to_dict(),
            "peak": _peak_label(ev),
            "evaluation": ev.to_dict(),
        })
    if cfg["curve_csv"]:
        with open(cfg["curve_csv"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "subset_size", "accuracy"])
            for row in rows:
                for size, acc in row["evaluation"]["accuracy_curve"]:
                    w.writerow([row["method"], size, repr(acc)])
    result = {"runs": rows}
    if cfg["benchmark"]:
        result["table"] = [
            {
                "method": r["method"],
                "peak_accuracy": r["peak"],
                "f1": round(r["evaluation"]["f1_at_peak"], 3),
                "auc_roc": round(r["evaluation"]["auc_at_peak"], 3),
            }
            for r in rows
        ]
    report = _report(cfg, result, d)
    _write_json(report, cfg["output"])
    return report


def cmd_exhaustive(cfg: dict) -> dict:
    d = _load(cfg)
    ranking = exhaustive_search(d, cfg["folds"], cfg["k_nn"], cfg["seed"], cfg["max_n"])
    est = _estimation_data(cfg, d)
    table = compute_uri_all(est, cfg["k"], cache=JointMICache(est, cfg["k"], cfg["threads"]))
    freq = top_frequency(ranking, table, cfg["top"])
    try:
        rho = uri_frequency_correlation(freq)
    except ValueError:
        rho = None
    freq_report = _report(cfg, {**freq.to_dict(), "uri_frequency_spearman": rho}, d)
    out = cfg["output"]
    freq_path = cfg["freq_output"] or (str(Path(out).with_suffix(".freq.json")) if out else None)
    if out and out.endswith(".csv"):
        ranking.write_csv(out)
    elif out:
        _write_json(_report(cfg, ranking.to_dict(), d), out)
    else:
        top = ranking.to_dict()
        top["entries"] = top["entries"][: cfg["top"]]
        freq_report["result"]["ranking_top"] = top
    _write_json(freq_report, freq_path)
    return freq_report


def cmd_mi(cfg: dict) -> dict:
    d = _load(cfg)
    est = _estimation_data(cfg, d)
    jmi = JointMICache(est, cfg["k"], cfg["threads"])
    values = []
    for text in cfg["subset"]:
        try:
            subset = sorted({int(tok) for tok in text.split(",") if tok.strip()})
        except ValueError:
            raise UsageError(f"--subset expects comma-separated integers, got {text!r}") from None
        values.append({"subset": subset, "names": [d.feature_names[i] for i in subset if 0 <= i < d.n_features],
                       "mi": jmi(subset)})
    report = _report(cfg, {"k": cfg["k"], "subsets": values}, d)
    _write_json(report, cfg["output"])
    return report


COMMANDS = {
    "prep-eeg": cmd_prep_eeg,
    "uri": cmd_uri,
    "select": cmd_select,
    "eval": cmd_eval,
    "exhaustive": cmd_exhaustive,
    "mi": cmd_mi,
}


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("replay", "verbose")}
    return cfg


def run(cfg: dict) -> int:
    command = cfg.get("command")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    if cfg.get("threads", 1) < 1:
        raise UsageError("--threads must be >= 1")
    for key in ("k", "k_nn", "folds", "top"):
        if key in cfg and cfg[key] is not None and cfg[key] < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    COMMANDS[command](cfg)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.replay:
        if args.command:
            parser.error("--replay cannot be combined with a command")
        try:
            cfg = json.loads(Path(args.replay).read_text(encoding="utf-8"))["config"]
        except (OSError, ValueError, KeyError) as exc:
            print(f"suri: cannot read replay config: {exc}", file=sys.stderr)
            return EXIT_USAGE
    elif not args.command:
        parser.error("a command is required")
    else:
        cfg = resolve_config(args)
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"suri: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SearchTooLarge as exc:
        print(f"suri: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DataError, EstimatorError, ValueError, OSError) as exc:
        print(f"suri: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
