"""Command-line entry points.

Subcommands:

  data fetch     download manifest datasets that declare a url
  data inspect   show availability and shape of manifest datasets
  rwr run        run the regression-with-rejection benchmark grid
  classify run   run the synthetic classification deferral experiment
  verify         run the theory checks and print one PASS/FAIL line each
  report         aggregate a result CSV into markdown or CSV tables
  plot-data      dump (target, prediction, sqrt risk) rows for one grid cell

Exit codes: 0 success, 1 config error, 2 partial failures, 3 verify failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .data import fetch_datasets, load_from_manifest, load_manifest
from .experiment import (
    ConfigError,
    export_plot_data,
    load_classify_config,
    load_rwr_config,
    read_results,
    render_report,
    run_classify,
    run_grid,
)
from .verify import run_all_checks

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2
EXIT_VERIFY = 3


def _cmd_data_fetch(args) -> int:
    entries = load_manifest(args.manifest)
    statuses = fetch_datasets(entries, overwrite=args.overwrite)
    failed = 0
    for name in sorted(statuses):
        status = statuses[name]
        print(f"{name}: {status}")
        if status.startswith("error"):
            failed += 1
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_data_inspect(args) -> int:
    entries = load_manifest(args.manifest)
    names = args.names or sorted(entries)
    unknown = [n for n in names if n not in entries]
    if unknown:
        print(f"unknown datasets: {unknown}", file=sys.stderr)
        return EXIT_CONFIG
    failures = 0
    for name in names:
        entry = entries[name]
        if not entry.available():
            print(f"{name}: missing ({entry.path})")
            continue
        try:
            ds = load_from_manifest(entry)
        except (OSError, ValueError) as exc:
            print(f"{name}: error ({exc})")
            failures += 1
            continue
        t = ds.targets
        print(f"{name}: {ds.n} rows x {ds.d} features, {entry.kind}, "
              f"target range [{t.min():.4g}, {t.max():.4g}]")
    return EXIT_PARTIAL if failures else EXIT_OK


def _cmd_rwr_run(args) -> int:
    config = load_rwr_config(args.config)
    outcome = run_grid(config, workers=args.workers)
    print(f"wrote {outcome.rows_written} rows "
          f"({outcome.rows_skipped} already present, {outcome.rows_failed} failed) "
          f"to {outcome.results_path}")
    if outcome.datasets_failed:
        print(f"datasets skipped: {', '.join(outcome.datasets_failed)}", file=sys.stderr)
    partial = outcome.rows_failed > 0 or bool(outcome.datasets_failed)
    return EXIT_PARTIAL if partial else EXIT_OK


def _cmd_classify_run(args) -> int:
    config = load_classify_config(args.config)
    outcome = run_classify(config)
    print(f"wrote {outcome.rows_written} rows "
          f"({outcome.rows_skipped} already present, {outcome.rows_failed} failed) "
          f"to {outcome.results_path}")
    return EXIT_PARTIAL if outcome.rows_failed else EXIT_OK


def _cmd_verify(args) -> int:
    checks = run_all_checks(seed=args.seed, brier_n=args.brier_n)
    any_failed = False
    for c in checks:
        verdict = "PASS" if c.passed else "FAIL"
        print(f"{c.name}: statistic={c.statistic:.6g} tolerance={c.tolerance:.6g} {verdict}")
        any_failed = any_failed or not c.passed
    return EXIT_VERIFY if any_failed else EXIT_OK


def _cmd_report(args) -> int:
    try:
        rows = read_results(args.input)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read results: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render_report(rows, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_plot_data(args) -> int:
    config = load_rwr_config(args.config)
    try:
        rows = export_plot_data(config, args.dataset, args.regressor,
                                args.calibrator, args.fold)
    except (OSError, ValueError) as exc:
        print(f"cannot export plot data: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    out = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["target", "prediction", "sqrt_estimated_loss"])
        for target, pred, band in rows:
            writer.writerow([repr(target), repr(pred), repr(band)])
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condrisk",
        description="Conditional-risk calibration benchmarks and theory checks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    data = sub.add_parser("data", help="dataset management")
    data_sub = data.add_subparsers(dest="data_command", required=True)
    fetch = data_sub.add_parser("fetch", help="download datasets declaring a url")
    fetch.add_argument("--manifest", default="datasets/manifest.toml")
    fetch.add_argument("--overwrite", action="store_true")
    fetch.set_defaults(func=_cmd_data_fetch)
    inspect = data_sub.add_parser("inspect", help="show dataset availability and shapes")
    inspect.add_argument("--manifest", default="datasets/manifest.toml")
    inspect.add_argument("names", nargs="*")
    inspect.set_defaults(func=_cmd_data_inspect)

    rwr = sub.add_parser("rwr", help="regression-with-rejection benchmark")
    rwr_sub = rwr.add_subparsers(dest="rwr_command", required=True)
    rwr_run = rwr_sub.add_parser("run", help="run the benchmark grid from a config")
    rwr_run.add_argument("--config", required=True)
    rwr_run.add_argument("--workers", type=int, default=None,
                         help="override config worker count")
    rwr_run.set_defaults(func=_cmd_rwr_run)

    classify = sub.add_parser("classify", help="classification deferral experiment")
    classify_sub = classify.add_subparsers(dest="classify_command", required=True)
    classify_run = classify_sub.add_parser("run", help="run the experiment from a config")
    classify_run.add_argument("--config", required=True)
    classify_run.set_defaults(func=_cmd_classify_run)

    verify = sub.add_parser("verify", help="run theory checks")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--brier-n", type=int, default=100_000)
    verify.set_defaults(func=_cmd_verify)

    report = sub.add_parser("report", help="aggregate a result CSV")
    report.add_argument("--input", required=True)
    report.add_argument("--format", choices=("csv", "md"), default="md")
    report.add_argument("--output", default=None)
    report.set_defaults(func=_cmd_report)

    plot = sub.add_parser("plot-data", help="export sorted (target, prediction, sqrt risk) rows")
    plot.add_argument("--config", required=True)
    plot.add_argument("--dataset", required=True)
    plot.add_argument("--regressor", required=True)
    plot.add_argument("--calibrator", required=True)
    plot.add_argument("--fold", type=int, required=True)
    plot.add_argument("--output", default=None)
    plot.set_defaults(func=_cmd_plot_data)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
