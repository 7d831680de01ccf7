"""Config-driven benchmark grids over (dataset, fold, model pair, cost).

Two experiment shapes share one result-CSV schema:

  rwr       regression datasets from a manifest; every regressor family is
            paired with every calibrator family and swept over deferral
            costs, 10-fold cross-validated.
  classify  a synthetic desk-scale classification task; classifier tiers
            are paired with plug-in probability backends (optionally
            temperature scaled) and a regression-on-losses baseline, one
            run per generator seed.

Result rows append incrementally, so a killed run resumes by skipping the
(dataset, fold, regressor, calibrator, cost) keys already on disk. All
model seeds derive from hashes of (master seed, dataset, fold, role,
family), never from execution order, which makes output identical across
worker counts and across resumed runs.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import multiprocessing
import os
import time
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import rng
from .data import SyntheticSpec, generate_synthetic, load_from_manifest, load_manifest, make_split_plans
from .defer import evaluate_precomputed
from .models import ModelSpec, fit
from .models.forest import warm_up as warm_up_forest
from .riskcal import (
    LossFn,
    fit_plugin_calibrator,
    fit_regression_calibrator,
    fit_temperature,
    sample_losses,
)
from ._reference import REFERENCE_COSTS, REFERENCE_RWR

log = logging.getLogger("condrisk")

RESULT_FIELDS = ("dataset", "fold", "regressor", "calibrator", "cost",
                 "rwr_loss", "reject_rate", "calib_mae", "predictor_loss",
                 "wall_time_ms")
RESULT_HEADER = ",".join(RESULT_FIELDS)

REGRESSION_FAMILIES = ("lr", "mlp", "mlp2", "rf")
CLASSIFY_ALIASES = ("softmax_linear", "softmax_mlp", "softmax_mlp2")


def model_spec_for(alias: str, seed: int, num_classes=None, standardize=None) -> ModelSpec:
    """Map an experiment-level family alias to a concrete ModelSpec.

    Standardization defaults to on for everything except the forest, whose
    splits are scale-equivariant anyway.
    """
    if standardize is None:
        standardize = alias != "rf"
    if alias in REGRESSION_FAMILIES:
        return ModelSpec(alias, seed=seed, standardize=standardize)
    if alias == "softmax_linear":
        return ModelSpec("softmax_linear", seed=seed, num_classes=num_classes, standardize=standardize)
    if alias == "softmax_mlp":
        return ModelSpec("softmax_mlp", seed=seed, num_classes=num_classes,
                         hidden=(64,), standardize=standardize)
    if alias == "softmax_mlp2":
        return ModelSpec("softmax_mlp", seed=seed, num_classes=num_classes,
                         hidden=(64, 64), standardize=standardize)
    raise ValueError(f"unknown model alias {alias!r}")


class ConfigError(Exception):
    pass


@dataclasses.dataclass(frozen=True)
class RwRConfig:
    manifest: Path
    datasets: tuple
    regressors: tuple = REGRESSION_FAMILIES
    calibrators: tuple = REGRESSION_FAMILIES
    costs: tuple = (0.2, 0.5, 1.0, 2.0)
    folds: int = 10
    master_seed: int = 42
    loss: str = "squared"
    output_dir: Path = Path("results")
    workers: int = 0  # 0 means all available cores


@dataclasses.dataclass(frozen=True)
class ClassifyConfig:
    n: int = 6000
    d: int = 8
    num_classes: int = 4
    predictors: tuple = ("softmax_linear", "softmax_mlp2")
    backends: tuple = CLASSIFY_ALIASES
    regression_backend: str = "mlp"
    include_temperature_scaled: bool = True
    costs: tuple = (0.2, 0.5, 1.0, 2.0)
    seeds: tuple = tuple(range(10))
    master_seed: int = 42
    output_dir: Path = Path("results-classify")


def _check_costs(costs):
    costs = tuple(float(c) for c in costs)
    if not costs or any(c <= 0 for c in costs) or list(costs) != sorted(costs):
        raise ConfigError("costs must be a nonempty ascending list of positive numbers")
    return costs


def load_rwr_config(path) -> RwRConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {"kind", "manifest", "datasets", "regressors", "calibrators", "costs",
             "folds", "master_seed", "loss", "output_dir", "workers"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    if doc.get("kind", "rwr") != "rwr":
        raise ConfigError(f"{path}: kind {doc.get('kind')!r} is not an rwr config")
    if "manifest" not in doc:
        raise ConfigError(f"{path}: 'manifest' is required")
    manifest_path = (path.parent / doc["manifest"]).resolve()
    try:
        entries = load_manifest(manifest_path)
    except (OSError, ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read manifest {manifest_path}: {exc}") from exc
    datasets = tuple(doc.get("datasets", sorted(entries)))
    missing = [d for d in datasets if d not in entries]
    if missing:
        raise ConfigError(f"{path}: datasets not in manifest: {missing}")
    for fam_key in ("regressors", "calibrators"):
        for fam in doc.get(fam_key, REGRESSION_FAMILIES):
            if fam not in REGRESSION_FAMILIES:
                raise ConfigError(f"{path}: unknown {fam_key[:-1]} family {fam!r}")
    folds = int(doc.get("folds", 10))
    if not 1 <= folds <= 10:
        raise ConfigError(f"{path}: folds must be in [1, 10] (runs the first k of the 10 plans)")
    if doc.get("loss", "squared") not in ("squared", "absolute"):
        raise ConfigError(f"{path}: rwr loss must be squared or absolute")
    try:
        costs = _check_costs(doc.get("costs", (0.2, 0.5, 1.0, 2.0)))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return RwRConfig(
        manifest=manifest_path,
        datasets=datasets,
        regressors=tuple(doc.get("regressors", REGRESSION_FAMILIES)),
        calibrators=tuple(doc.get("calibrators", REGRESSION_FAMILIES)),
        costs=costs,
        folds=folds,
        master_seed=int(doc.get("master_seed", 42)),
        loss=doc.get("loss", "squared"),
        output_dir=(path.parent / doc.get("output_dir", "results")).resolve(),
        workers=int(doc.get("workers", 0)),
    )


def load_classify_config(path) -> ClassifyConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {"kind", "n", "d", "num_classes", "predictors", "backends",
             "regression_backend", "include_temperature_scaled", "costs",
             "seeds", "master_seed", "output_dir"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    if doc.get("kind", "classify") != "classify":
        raise ConfigError(f"{path}: kind {doc.get('kind')!r} is not a classify config")
    for alias in tuple(doc.get("predictors", ())) + tuple(doc.get("backends", ())):
        if alias not in CLASSIFY_ALIASES:
            raise ConfigError(f"{path}: unknown classifier alias {alias!r}")
    if doc.get("regression_backend", "mlp") not in REGRESSION_FAMILIES:
        raise ConfigError(f"{path}: unknown regression backend")
    try:
        costs = _check_costs(doc.get("costs", (0.2, 0.5, 1.0, 2.0)))
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = ClassifyConfig(
        n=int(doc.get("n", 6000)),
        d=int(doc.get("d", 8)),
        num_classes=int(doc.get("num_classes", 4)),
        predictors=tuple(doc.get("predictors", ("softmax_linear", "softmax_mlp2"))),
        backends=tuple(doc.get("backends", CLASSIFY_ALIASES)),
        regression_backend=doc.get("regression_backend", "mlp"),
        include_temperature_scaled=bool(doc.get("include_temperature_scaled", True)),
        costs=costs,
        seeds=tuple(int(s) for s in doc.get("seeds", range(10))),
        master_seed=int(doc.get("master_seed", 42)),
        output_dir=(path.parent / doc.get("output_dir", "results-classify")).resolve(),
    )
    if cfg.n < 100 or cfg.d < 1 or cfg.num_classes < 2 or not cfg.seeds:
        raise ConfigError(f"{path}: degenerate classify configuration")
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row_key(dataset, fold, regressor, calibrator, cost):
    return (dataset, int(fold), regressor, calibrator, repr(float(cost)))


def _read_done_keys(path: Path):
    done = set()
    if not path.exists():
        return done
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return done
        if tuple(reader.fieldnames) != RESULT_FIELDS:
            raise ConfigError(f"{path} exists with a different schema; refusing to append")
        for row in reader:
            done.add(_row_key(row["dataset"], row["fold"], row["regressor"],
                              row["calibrator"], float(row["cost"])))
    return done


@dataclasses.dataclass(frozen=True)
class GridOutcome:
    results_path: Path
    rows_written: int
    rows_skipped: int
    rows_failed: int
    datasets_failed: tuple = ()


def _nan_metrics():
    return dict(rwr_loss=float("nan"), reject_rate=float("nan"),
                calib_mae=float("nan"), predictor_loss=float("nan"))


def _rwr_unit(args):
    """Worker for one (dataset, fold) cell of the rwr grid; returns rows."""
    ds, plan, cfg = args
    loss = LossFn(cfg.loss)
    X, y = ds.features, ds.targets
    Xr, yr = X[plan.regressor_rows], y[plan.regressor_rows]
    Xc, yc = X[plan.calibrator_rows], y[plan.calibrator_rows]
    Xt, yt = X[plan.test_rows], y[plan.test_rows]
    n_costs = len(cfg.costs)
    rows = []
    for rfam in cfg.regressors:
        rseed = rng.scope_seed(cfg.master_seed, ds.name, plan.fold_index, "regressor", rfam)
        t0 = time.perf_counter()
        try:
            fhat, _ = fit(model_spec_for(rfam, rseed), Xr, yr)
        except Exception:
            log.exception("regressor %s failed on %s fold %d", rfam, ds.name, plan.fold_index)
            for cfam in cfg.calibrators:
                for cost in cfg.costs:
                    rows.append(dict(dataset=ds.name, fold=plan.fold_index, regressor=rfam,
                                     calibrator=cfam, cost=cost, wall_time_ms=0.0,
                                     **_nan_metrics()))
            continue
        reg_ms = (time.perf_counter() - t0) * 1000.0
        reg_share = reg_ms / (len(cfg.calibrators) * n_costs)
        z_test = sample_losses(fhat, loss, Xt, yt)
        predictor_loss = float(z_test.mean())

        for cfam in cfg.calibrators:
            cseed = rng.scope_seed(cfg.master_seed, ds.name, plan.fold_index,
                                   "calibrator", rfam, cfam)
            t1 = time.perf_counter()
            try:
                cal = fit_regression_calibrator(
                    model_spec_for(cfam, cseed), loss, fhat, Xc, yc,
                    plan=plan, cal_rows=plan.calibrator_rows)
                est = cal.estimate(Xt)
            except Exception:
                log.exception("calibrator %s (regressor %s) failed on %s fold %d",
                              cfam, rfam, ds.name, plan.fold_index)
                for cost in cfg.costs:
                    rows.append(dict(dataset=ds.name, fold=plan.fold_index, regressor=rfam,
                                     calibrator=cfam, cost=cost, wall_time_ms=0.0,
                                     **_nan_metrics()))
                continue
            mae = float(np.mean(np.abs(est - z_test)))
            pair_ms = (time.perf_counter() - t1) * 1000.0
            for cost in cfg.costs:
                rep = evaluate_precomputed(z_test, est, cost)
                rows.append(dict(dataset=ds.name, fold=plan.fold_index, regressor=rfam,
                                 calibrator=cfam, cost=cost,
                                 rwr_loss=rep.rwr_loss, reject_rate=rep.reject_rate,
                                 calib_mae=mae, predictor_loss=predictor_loss,
                                 wall_time_ms=reg_share + pair_ms / n_costs))
    return rows


def _append_rows(path: Path, rows, done_keys) -> tuple[int, int, int]:
    """Append rows not already present. Returns (written, skipped, failed)."""
    written = skipped = failed = 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in rows:
            key = _row_key(row["dataset"], row["fold"], row["regressor"],
                           row["calibrator"], row["cost"])
            if key in done_keys:
                skipped += 1
                continue
            done_keys.add(key)
            writer.writerow([_fmt(row[f]) for f in RESULT_FIELDS])
            written += 1
            if isinstance(row["rwr_loss"], float) and math.isnan(row["rwr_loss"]):
                failed += 1
        fh.flush()
    return written, skipped, failed


def _unit_fully_done(ds_name, fold, cfg, done_keys) -> bool:
    for rfam in cfg.regressors:
        for cfam in cfg.calibrators:
            for cost in cfg.costs:
                if _row_key(ds_name, fold, rfam, cfam, cost) not in done_keys:
                    return False
    return True


def run_grid(config: RwRConfig, workers: int | None = None) -> GridOutcome:
    """Run the rwr benchmark grid, appending to output_dir/results.csv."""
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "results.csv"
    done = _read_done_keys(out_path)
    if not out_path.exists():
        out_path.write_text(RESULT_HEADER + "\n", encoding="utf-8")

    entries = load_manifest(config.manifest)
    datasets_failed = []
    units = []
    unit_size = len(config.regressors) * len(config.calibrators) * len(config.costs)
    written = skipped = failed = 0
    for name in config.datasets:
        try:
            ds = load_from_manifest(entries[name])
        except (OSError, ValueError) as exc:
            log.error("skipping dataset %s: %s", name, exc)
            datasets_failed.append(name)
            continue
        plans = make_split_plans(ds.n, rng.scope_seed("plans", config.master_seed, name))
        for plan in plans[:config.folds]:
            if _unit_fully_done(ds.name, plan.fold_index, config, done):
                skipped += unit_size
            else:
                units.append((ds, plan, config))

    if units:
        warm_up_forest()
    n_workers = workers if workers is not None else config.workers
    if n_workers <= 0:
        n_workers = os.cpu_count() or 1
    if n_workers == 1 or len(units) <= 1:
        for unit in units:
            w, s, f = _append_rows(out_path, _rwr_unit(unit), done)
            written, skipped, failed = written + w, skipped + s, failed + f
    else:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=min(n_workers, len(units))) as pool:
            for rows in pool.imap(_rwr_unit, units, chunksize=1):
                w, s, f = _append_rows(out_path, rows, done)
                written, skipped, failed = written + w, skipped + s, failed + f

    return GridOutcome(results_path=out_path, rows_written=written,
                       rows_skipped=skipped, rows_failed=failed,
                       datasets_failed=tuple(datasets_failed))


def _classify_unit(cfg: ClassifyConfig, seed_index: int, seed: int):
    """One generator seed of the desk-scale classification experiment."""
    loss = LossFn("cross-entropy")
    data_seed = rng.scope_seed(cfg.master_seed, "classify-data", seed)
    ds, _ = generate_synthetic(SyntheticSpec(
        "known-density-classification", n=cfg.n, d=cfg.d, K=cfg.num_classes, seed=data_seed))
    order = rng.stream("classify-split", cfg.master_seed, seed).permutation(cfg.n)
    n_tr = cfg.n // 2
    n_cal = (4 * cfg.n) // 10
    tr, cal_rows, te = order[:n_tr], order[n_tr:n_tr + n_cal], order[n_tr + n_cal:]
    X, y = ds.features, ds.targets
    ds_name = "desk-classification"

    backends = {}
    for alias in cfg.backends:
        bseed = rng.scope_seed(cfg.master_seed, seed, "backend", alias)
        backends[alias], _ = fit(model_spec_for(alias, bseed, num_classes=cfg.num_classes),
                                 X[tr], y[tr])

    rows = []
    for pfam in cfg.predictors:
        pseed = rng.scope_seed(cfg.master_seed, seed, "predictor", pfam)
        fhat, _ = fit(model_spec_for(pfam, pseed, num_classes=cfg.num_classes), X[tr], y[tr])
        z_test = sample_losses(fhat, loss, X[te], y[te])
        predictor_loss = float(z_test.mean())

        calibrators = []
        rseed = rng.scope_seed(cfg.master_seed, seed, "reg-calibrator", pfam)
        t0 = time.perf_counter()
        reg_cal = fit_regression_calibrator(
            model_spec_for(cfg.regression_backend, rseed), loss, fhat,
            X[cal_rows], y[cal_rows])
        calibrators.append((f"reg:{cfg.regression_backend}", reg_cal,
                            (time.perf_counter() - t0) * 1000.0))
        for alias in cfg.backends:
            t0 = time.perf_counter()
            calibrators.append((f"plugin:{alias}",
                                fit_plugin_calibrator(fhat, backends[alias], loss),
                                (time.perf_counter() - t0) * 1000.0))
            if cfg.include_temperature_scaled:
                t0 = time.perf_counter()
                tf = fit_temperature(backends[alias], X[cal_rows], y[cal_rows])
                calibrators.append((f"plugin-ts:{alias}",
                                    fit_plugin_calibrator(fhat, backends[alias], loss,
                                                          temperature=tf.temperature),
                                    (time.perf_counter() - t0) * 1000.0))

        for cal_name, cal, fit_ms in calibrators:
            est = cal.estimate(X[te])
            mae = float(np.mean(np.abs(est - z_test)))
            for cost in cfg.costs:
                rep = evaluate_precomputed(z_test, est, cost)
                rows.append(dict(dataset=ds_name, fold=seed_index, regressor=pfam,
                                 calibrator=cal_name, cost=cost,
                                 rwr_loss=rep.rwr_loss, reject_rate=rep.reject_rate,
                                 calib_mae=mae, predictor_loss=predictor_loss,
                                 wall_time_ms=fit_ms / len(cfg.costs)))
    return rows


def _classify_unit_keys(cfg: ClassifyConfig, seed_index: int) -> set:
    names = [f"reg:{cfg.regression_backend}"]
    for alias in cfg.backends:
        names.append(f"plugin:{alias}")
        if cfg.include_temperature_scaled:
            names.append(f"plugin-ts:{alias}")
    return {_row_key("desk-classification", seed_index, pfam, name, cost)
            for pfam in cfg.predictors for name in names for cost in cfg.costs}


def run_classify(config: ClassifyConfig) -> GridOutcome:
    """Run the desk-scale classification deferral experiment."""
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "results.csv"
    done = _read_done_keys(out_path)
    if not out_path.exists():
        out_path.write_text(RESULT_HEADER + "\n", encoding="utf-8")

    written = skipped = failed = 0
    for idx, seed in enumerate(config.seeds):
        expected = _classify_unit_keys(config, idx)
        if expected <= done:
            skipped += len(expected)
            continue
        rows = _classify_unit(config, idx, seed)
        w, s, f = _append_rows(out_path, rows, done)
        written, skipped, failed = written + w, skipped + s, failed + f
    return GridOutcome(results_path=out_path, rows_written=written,
                       rows_skipped=skipped, rows_failed=failed)


def read_results(path) -> list[dict]:
    """Parse a result CSV into typed row dicts."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is not None and tuple(reader.fieldnames) != RESULT_FIELDS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for raw in reader:
            rows.append(dict(
                dataset=raw["dataset"], fold=int(raw["fold"]),
                regressor=raw["regressor"], calibrator=raw["calibrator"],
                cost=float(raw["cost"]), rwr_loss=float(raw["rwr_loss"]),
                reject_rate=float(raw["reject_rate"]), calib_mae=float(raw["calib_mae"]),
                predictor_loss=float(raw["predictor_loss"]),
                wall_time_ms=float(raw["wall_time_ms"]),
            ))
    return rows


def aggregate(rows) -> dict:
    """Mean over folds for every (dataset, regressor, calibrator, cost) cell.

    Returns {"cells": ..., "predictor": ..., "calib": ..., "dropped": n}
    where failed rows (NaN metrics) are excluded and counted.
    """
    cells = {}
    dropped = 0
    for row in rows:
        if math.isnan(row["rwr_loss"]):
            dropped += 1
            continue
        cells.setdefault((row["dataset"], row["regressor"], row["calibrator"], row["cost"]),
                         []).append(row)
    out_cells = {}
    predictor = {}
    calib = {}
    for key, group in cells.items():
        dataset, regressor, calibrator, cost = key
        out_cells[key] = dict(
            rwr_loss=float(np.mean([g["rwr_loss"] for g in group])),
            reject_rate=float(np.mean([g["reject_rate"] for g in group])),
            calib_mae=float(np.mean([g["calib_mae"] for g in group])),
            predictor_loss=float(np.mean([g["predictor_loss"] for g in group])),
            folds=len(group),
        )
        predictor.setdefault((dataset, regressor), []).extend(
            (g["fold"], g["predictor_loss"]) for g in group)
        calib.setdefault((dataset, regressor, calibrator), []).extend(
            (g["fold"], g["calib_mae"]) for g in group)
    predictor = {k: float(np.mean([loss for _, loss in set(v)])) for k, v in predictor.items()}
    calib = {k: float(np.mean([mae for _, mae in set(v)])) for k, v in calib.items()}
    return dict(cells=out_cells, predictor=predictor, calib=calib, dropped=dropped)


def _order_of(seq):
    seen = []
    for item in seq:
        if item not in seen:
            seen.append(item)
    return seen


def render_report(rows, fmt="md") -> str:
    """Render aggregated tables from raw result rows.

    "csv" gives one aggregated long-form table. "md" gives, per dataset,
    the predictor-loss table, the calibrator-error table, and the RwR grid
    with the best calibrator per (regressor, cost) in bold, plus published
    reference baselines when the dataset has them.
    """
    agg = aggregate(rows)
    datasets = _order_of(r["dataset"] for r in rows)
    regressors = _order_of(r["regressor"] for r in rows)
    calibrators = _order_of(r["calibrator"] for r in rows)
    costs = sorted({r["cost"] for r in rows})

    if fmt == "csv":
        lines = ["dataset,regressor,calibrator,cost,rwr_loss,reject_rate,calib_mae,predictor_loss,folds"]
        for (dataset, regressor, calibrator, cost), cell in sorted(agg["cells"].items()):
            lines.append(",".join([dataset, regressor, calibrator, repr(cost),
                                   repr(cell["rwr_loss"]), repr(cell["reject_rate"]),
                                   repr(cell["calib_mae"]), repr(cell["predictor_loss"]),
                                   str(cell["folds"])]))
        return "\n".join(lines) + "\n"
    if fmt != "md":
        raise ValueError(f"unknown report format {fmt!r}")

    out = []
    for dataset in datasets:
        out.append(f"## {dataset}\n")
        present_regs = [r for r in regressors if (dataset, r) in agg["predictor"]]
        if present_regs:
            out.append("| regressor | mean predictor loss |")
            out.append("|---|---|")
            for r in present_regs:
                out.append(f"| {r} | {agg['predictor'][(dataset, r)]:.4f} |")
            out.append("")
        cal_cols = [c for c in calibrators
                    if any((dataset, r, c) in agg["calib"] for r in regressors)]
        if cal_cols:
            out.append("| calibrator MAE | " + " | ".join(cal_cols) + " |")
            out.append("|" + "---|" * (len(cal_cols) + 1))
            for r in present_regs:
                vals = []
                for c in cal_cols:
                    v = agg["calib"].get((dataset, r, c))
                    vals.append(f"{v:.4f}" if v is not None else "")
                out.append(f"| {r} | " + " | ".join(vals) + " |")
            out.append("")
        out.append("| pair \\ cost | " + " | ".join(str(c) for c in costs) + " |")
        out.append("|" + "---|" * (len(costs) + 1))
        for r in present_regs:
            best_at = {}
            for cost in costs:
                have = [(c, agg["cells"].get((dataset, r, c, cost))) for c in cal_cols]
                have = [(c, cell) for c, cell in have if cell is not None]
                if have:
                    best_at[cost] = min(have, key=lambda t: t[1]["rwr_loss"])[0]
            for c in cal_cols:
                vals = []
                for cost in costs:
                    cell = agg["cells"].get((dataset, r, c, cost))
                    if cell is None:
                        vals.append("")
                    elif best_at.get(cost) == c:
                        vals.append(f"**{cell['rwr_loss']:.4f}**")
                    else:
                        vals.append(f"{cell['rwr_loss']:.4f}")
                out.append(f"| {r}+{c} | " + " | ".join(vals) + " |")
        ref = REFERENCE_RWR.get(dataset)
        if ref and tuple(costs) == REFERENCE_COSTS:
            for method, vals in ref.items():
                out.append(f"| {method} (published) | " + " | ".join(f"{v:.2f}" for v in vals) + " |")
        out.append("")
        if agg["dropped"]:
            out.append(f"(dropped {agg['dropped']} failed rows)\n")
    return "\n".join(out)


def export_plot_data(config: RwRConfig, dataset: str, regressor: str,
                     calibrator: str, fold: int):
    """Recreate one grid cell and dump (target, prediction, sqrt risk) rows
    sorted by target, the shape used for risk-band plots."""
    if dataset not in config.datasets:
        raise ConfigError(f"dataset {dataset!r} not in config")
    if regressor not in REGRESSION_FAMILIES or calibrator not in REGRESSION_FAMILIES:
        raise ConfigError("unknown regressor or calibrator family")
    entries = load_manifest(config.manifest)
    ds = load_from_manifest(entries[dataset])
    plans = make_split_plans(ds.n, rng.scope_seed("plans", config.master_seed, dataset))
    if not 0 <= fold < len(plans):
        raise ConfigError(f"fold must be in [0, {len(plans)})")
    plan = plans[fold]
    loss = LossFn(config.loss)
    X, y = ds.features, ds.targets

    rseed = rng.scope_seed(config.master_seed, ds.name, plan.fold_index, "regressor", regressor)
    fhat, _ = fit(model_spec_for(regressor, rseed), X[plan.regressor_rows], y[plan.regressor_rows])
    cseed = rng.scope_seed(config.master_seed, ds.name, plan.fold_index,
                           "calibrator", regressor, calibrator)
    cal = fit_regression_calibrator(model_spec_for(calibrator, cseed), loss, fhat,
                                    X[plan.calibrator_rows], y[plan.calibrator_rows],
                                    plan=plan, cal_rows=plan.calibrator_rows)
    Xt, yt = X[plan.test_rows], y[plan.test_rows]
    pred = fhat.predict(Xt)
    est = cal.estimate(Xt)
    order = np.argsort(yt, kind="stable")
    return [(float(yt[i]), float(pred[i]), float(np.sqrt(max(est[i], 0.0)))) for i in order]
