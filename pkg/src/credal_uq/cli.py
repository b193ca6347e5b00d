"""Command-line entry point: ``credal-uq {validate,measure,arc,bench,generate}``.

Exit codes: 0 ok, 1 usage, 2 parse, 3 shape, 4 simplex, 5 Hartley unavailable,
6 missing labels.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from importlib import metadata
from pathlib import Path

from . import baselines, measures
from .ingest import (
    DatasetError,
    attach_manifest,
    dumps,
    filter_by_relative_likelihood,
    format_float,
    load_dataset,
    load_manifest,
    write_jsonl,
    write_manifest,
)
from .report import (
    REFERENCE_MEASURES,
    default_workers,
    measures_for,
    parse_measures,
    score_dataset,
    score_keys,
    scored_instances,
)
from .selective import MissingLabelError, aggregate_curves, score_and_curve, tie_frequency
from .synthetic import SyntheticConfig, generate

log = logging.getLogger("credal_uq")

EXIT_USAGE = 1
EXIT_HARTLEY = 5
EXIT_LABELS = 6

# Asymptotic cost per instance, for the bench table.
COMPLEXITY = {
    "tu_tv": ("total", "O(MK)"),
    "entropy_upper": ("total", "O(T_conv MK)"),
    "au_tv_upper": ("aleatoric", "Omega(MK), O(T_lp MK)"),
    "au_tv_lower": ("aleatoric", "O(MK)"),
    "entropy_lower": ("aleatoric", "O(MK)"),
    "hartley_au": ("aleatoric", "O(MK + 3^K)"),
    "eu_tv": ("epistemic", "O(M^2 K)"),
    "entropy_eu": ("epistemic", "O(T_conv MK)"),
    "hartley_gh": ("epistemic", "O(3^K)"),
}


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(args):
    ds = load_dataset(args.input, fmt=args.format, strict=getattr(args, "strict", False))
    manifest = getattr(args, "manifest", None)
    if manifest:
        ds = attach_manifest(ds, load_manifest(manifest))
    alpha = getattr(args, "alpha", None)
    if alpha is not None:
        if ds.likelihood_ratios is None:
            raise ValueError("--alpha needs likelihood ratios; pass --manifest")
        ds = filter_by_relative_likelihood(ds, alpha)
    return ds


def cmd_validate(args) -> int:
    try:
        ds = load_dataset(args.input, fmt=args.format, strict=args.strict)
    except DatasetError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return exc.exit_code
    labelled = sum(inst.label is not None for inst in ds.instances)
    print(f"ok: {len(ds)} instances, M={ds.m}, K={ds.k}, {labelled} labelled")
    return 0


def _write_report(path, rows, manifest) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")
        fh.write(dumps({"manifest": manifest}) + "\n")


def cmd_measure(args) -> int:
    try:
        selected = parse_measures(args.measures)
        ds = _load(args)
        workers = args.workers or default_workers()
        t0 = time.perf_counter()
        rows, timings = score_dataset(ds, selected, workers=workers, k_max=args.hartley_k_max)
        wall = time.perf_counter() - t0
    except DatasetError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return exc.exit_code
    except baselines.HartleyUnavailable as exc:
        return _fail(EXIT_HARTLEY, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))

    manifest = {
        "tool": "credal-uq",
        "version": _version(),
        "inputs": [str(args.input)] + ([str(args.manifest)] if args.manifest else []),
        "measures": list(selected),
        "alpha": args.alpha,
        "bin_count": None,
        "seed": None,
        "model_ids": list(ds.model_ids),
        "n": len(ds),
        "k": ds.k,
        "timings_file": None,
    }
    out = Path(args.out) if args.out else None
    if out is None:
        for row in rows:
            print(dumps(row))
        print(dumps({"manifest": manifest}))
    else:
        timings_path = out.with_name(out.name + ".timings.json")
        manifest["timings_file"] = timings_path.name
        _write_report(out, rows, manifest)
        with open(timings_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"seconds": timings, "wall_seconds": wall, "workers": workers}, indent=2) + "\n")
    for m, t in timings.items():
        log.info("%s: %.4f s over %d instances", m, t, len(ds))
    return 0


def _read_report(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "manifest" not in obj:
                rows.append(obj)
    return rows


def _is_report(path) -> bool:
    if str(path).lower().endswith(".csv"):
        return False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                return "probs" not in obj
    return False


def cmd_arc(args) -> int:
    try:
        if _is_report(args.input):
            rows = _read_report(args.input)
        else:
            ds = _load(args)
            rows, _ = score_dataset(
                ds, measures_for(args.measure, args.component), workers=args.workers or default_workers()
            )
        if not rows:
            raise ValueError("no instances")
        if any(r.get("label") is None for r in rows):
            raise MissingLabelError("true labels are required for accuracy-rejection curves")
        keys = score_keys(rows, args.measure, args.component, seed=args.seed)
        records = scored_instances(rows, keys)
        curve = score_and_curve(records, args.bins)
        batch_summary = None
        if args.batches > 1:
            size = len(records) // args.batches
            curves = [
                score_and_curve(records[b * size : (b + 1) * size], args.bins) for b in range(args.batches)
            ]
            agg = aggregate_curves(curves)
            batch_summary = {k: agg[k] for k in ("auc_mean", "auc_std", "mr_mean", "mr_std")}
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(2, str(exc))
    except DatasetError as exc:
        for d in exc.diagnostics:
            print(d, file=sys.stderr)
        return exc.exit_code
    except MissingLabelError as exc:
        return _fail(EXIT_LABELS, str(exc))
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))

    summary = {
        "measure": args.measure,
        "component": args.component if args.measure not in REFERENCE_MEASURES else None,
        "bins": curve.bin_count,
        "auc": curve.auc,
        "mr": curve.mr,
        "n": len(records),
        "tie_frequency": tie_frequency(records),
    }
    if batch_summary:
        summary["batches"] = args.batches
        summary.update(batch_summary)
    if args.out:
        out = Path(args.out)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["rejection_fraction", "accuracy"])
            for r, a in curve.bins:
                w.writerow([format_float(r), format_float(a)])
        summary_path = Path(args.summary) if args.summary else out.with_suffix(".json")
        summary_path.write_text(dumps(summary) + "\n", encoding="utf-8")
    print(dumps(summary))
    return 0


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _time_over(fn, sets) -> float:
    t0 = time.perf_counter()
    for cs in sets:
        fn(cs)
    return time.perf_counter() - t0


def cmd_bench(args) -> int:
    timed = [
        ("tu_tv", measures.tu_tv),
        ("au_tv_lower", measures.au_tv_lower),
        ("au_tv_upper", measures.au_tv_upper),
        ("eu_tv", measures.eu_tv),
        ("entropy_upper", baselines.entropy_upper),
        ("entropy_lower", baselines.entropy_lower),
        ("hartley_gh", baselines.generalized_hartley),
    ]
    table = []
    for k in _int_list(args.k):
        for m in _int_list(args.m):
            ds, _ = generate(SyntheticConfig(k=k, n=args.n, m=m, noise=args.noise, seed=args.seed))
            sets = [inst.credal_set for inst in ds.instances]
            for name, fn in timed:
                component, cost = COMPLEXITY[name]
                if name == "hartley_gh" and k > args.hartley_k_max:
                    seconds = None
                else:
                    seconds = _time_over(fn, sets)
                table.append(
                    {"k": k, "m": m, "n": args.n, "component": component, "measure": name,
                     "complexity": cost, "seconds": seconds}
                )
    print(f"{'K':>5} {'M':>5} {'N':>6}  {'component':<10} {'measure':<14} {'seconds':>10}  complexity")
    for r in table:
        sec = "--" if r["seconds"] is None else f"{r['seconds']:.4f}"
        print(f"{r['k']:>5} {r['m']:>5} {r['n']:>6}  {r['component']:<10} {r['measure']:<14} {sec:>10}  {r['complexity']}")
    if args.out:
        Path(args.out).write_text(json.dumps(table, indent=2) + "\n", encoding="utf-8")
    return 0


def cmd_generate(args) -> int:
    try:
        cfg = SyntheticConfig(k=args.k, n=args.n, m=args.m, noise=args.noise, seed=args.seed)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    ds, _ = generate(cfg)
    write_jsonl(ds, args.out)
    if args.manifest_out:
        # Synthetic members are exchangeable; all fit equally well.
        write_manifest(ds.model_ids, [1.0] * ds.m, args.manifest_out)
    print(f"wrote {len(ds)} instances (M={ds.m}, K={ds.k}) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credal-uq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log timings and progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("input", help="dataset (JSONL or CSV)")
        p.add_argument("--format", choices=["jsonl", "csv"], help="input format (default: by extension)")
        p.add_argument("--strict", action="store_true", help="reject rows that would need renormalizing")

    def add_workers(p):
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $CREDAL_UQ_THREADS or CPU count)")

    p = sub.add_parser("validate", help="check a dataset without scoring it")
    add_input(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("measure", help="score every instance and write a JSONL report")
    add_input(p)
    add_workers(p)
    p.add_argument("--measures", default="tu,au,eu", help="comma list from tu,au,eu,entropy,hartley")
    p.add_argument("--manifest", help="JSON manifest with model_ids and likelihood_ratios")
    p.add_argument("--alpha", type=float, default=None, help="keep models with likelihood ratio >= alpha")
    p.add_argument("--hartley-k-max", type=int, default=baselines.HARTLEY_K_MAX)
    p.add_argument("--out", help="report path (default: stdout)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("arc", help="accuracy-rejection curve from a report or a dataset")
    add_input(p)
    add_workers(p)
    p.add_argument("--measure", default="tv", choices=["tv", "entropy", "hartley", *REFERENCE_MEASURES])
    p.add_argument("--component", default="tu", choices=["tu", "au", "eu"])
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--batches", type=int, default=1, help="also report mean/sd over this many batches")
    p.add_argument("--seed", type=int, default=0, help="seed for --measure random")
    p.add_argument("--manifest")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", help="curve CSV path")
    p.add_argument("--summary", help="summary JSON path (default: --out with .json suffix)")
    p.set_defaults(func=cmd_arc)

    p = sub.add_parser("bench", help="time every measure on synthetic data")
    p.add_argument("--k", default="10,100", help="comma list of class counts")
    p.add_argument("--m", default="5,10", help="comma list of ensemble sizes")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hartley-k-max", type=int, default=baselines.HARTLEY_K_MAX)
    p.add_argument("--out", help="write the table as JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="write a synthetic ensemble dataset as JSONL")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest-out", help="also write a likelihood-ratio manifest")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
