"""Command-line interface.

Subcommands: predict, train, sweep, evaluate, sensitivity, curve.  Report
commands write delimited tables (the authoritative machine-readable output)
and render companion PNG figures next to them unless --no-figures is given.

Exit codes: 0 success, 2 usage or bad point inputs, 3 data validation,
4 numerical failure.  Diagnostics go to standard error; set GMPE_ANN_LOG to
quiet, info, or debug to tune verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import analysis, dataio, trainer
from .core import (STANDARD_GRAVITY_CMPS2, NetworkModel, Target,
                   batch_normalized_log, forward, out_of_domain_reasons,
                   published_model)
from .errors import (AnalysisError, CatalogError, InputDomainError,
                     ModelFormatError, TrainingError)

log = logging.getLogger("gmpe_ann.cli")

_LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("GMPE_ANN_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def _load_model(selector: str) -> NetworkModel:
    if selector == "published-pga":
        return published_model(Target.PGA)
    if selector == "published-pgv":
        return published_model(Target.PGV)
    if selector.startswith("file:"):
        return dataio.read_model(selector[len("file:"):])
    raise ValueError(
        f"unknown model selector {selector!r}; use published-pga, published-pgv, or file:<path>")


def _read_catalog(path, strict: bool):
    records, report = dataio.read_catalog(path, strict=strict)
    if report.errors:
        log.warning("skipped %d bad catalog rows (first: %s)",
                    report.n_rejected, report.errors[0][1])
        for line_num, message in report.errors:
            log.info("rejected row: %s", message)
    if not records:
        raise CatalogError(f"{path}: no valid records")
    return records, report


def _make_outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _value_column(target: Target) -> str:
    return "pga_cmps2" if target is Target.PGA else "pgv_cmps"


def _check_units(units: str, target: Target) -> None:
    if units == "g" and target is not Target.PGA:
        raise ValueError("--units g applies only to PGA models")


def _rjb_grid(args) -> np.ndarray:
    if args.rjb_max <= args.rjb_min or args.rjb_min <= 0:
        raise ValueError("require 0 < --rjb-min < --rjb-max")
    if args.rjb_points < 1:
        raise ValueError("--rjb-points must be >= 1")
    if args.rjb_points == 1:
        return np.array([args.rjb_min])
    if args.rjb_spacing == "log":
        return np.geomspace(args.rjb_min, args.rjb_max, args.rjb_points)
    return np.linspace(args.rjb_min, args.rjb_max, args.rjb_points)


# -- predict ----------------------------------------------------------------

def cmd_predict(args) -> int:
    model = _load_model(args.model)
    _check_units(args.units, model.target)

    point_given = [v is not None for v in (args.mw, args.vs30, args.rjb)]
    if args.catalog is None:
        if not all(point_given):
            raise ValueError("single-point mode needs --mw, --vs30, and --rjb "
                             "(or use --catalog for batch mode)")
        pred = forward(model, args.mw, args.vs30, args.rjb)
        for reason in out_of_domain_reasons(args.mw, args.rjb):
            print(f"warning: {reason}; prediction is an extrapolation", file=sys.stderr)
        print(f"target={model.target.value}")
        print(f"units={model.target.units}")
        print(f"value={pred.value!r}")
        if args.units == "g":
            print(f"value_g={pred.value / STANDARD_GRAVITY_CMPS2!r}")
        print(f"ln_value={pred.log_value!r}")
        print(f"normalized_ln={pred.normalized_log!r}")
        return 0

    if any(point_given):
        raise ValueError("give either --mw/--vs30/--rjb or --catalog, not both")
    if args.out is None:
        raise ValueError("batch mode requires --out")
    records, _ = _read_catalog(args.catalog, args.strict)
    values = [forward(model, r.magnitude, r.vs30, r.rjb).value for r in records]
    flags = [1 if out_of_domain_reasons(r.magnitude, r.rjb) else 0 for r in records]

    col = f"predicted_{_value_column(model.target)}"
    header = list(dataio.REQUIRED_COLUMNS) + [col]
    if args.units == "g":
        header.append("predicted_pga_g")
    header.append("out_of_domain")
    rows = []
    for r, v, f in zip(records, values, flags):
        row = [r.event_id, r.station_id, r.magnitude, r.vs30, r.rjb, r.pga, r.pgv, v]
        if args.units == "g":
            row.append(v / STANDARD_GRAVITY_CMPS2)
        row.append(f)
        rows.append(row)
    dataio.write_table(args.out, header, rows)
    print(f"predictions={len(rows)}")
    print(f"out_of_domain={sum(flags)}")
    print(f"output={args.out}")
    return 0


# -- train ------------------------------------------------------------------

def _train_config(args) -> trainer.TrainConfig:
    return trainer.TrainConfig(hidden_count=args.hidden,
                               max_iterations=args.max_iterations,
                               patience=args.patience,
                               init_seed=args.seed,
                               init_scale=args.init_scale)


def _split_spec(args) -> trainer.SplitSpec:
    return trainer.SplitSpec(train_fraction=args.train_fraction,
                             validation_fraction=args.validation_fraction,
                             test_fraction=args.test_fraction,
                             seed=args.seed)


def _scatter_rows(records, report: trainer.TrainingReport):
    model = report.model
    rows = []
    nlog_obs = np.log([getattr(r, "pga" if model.target is Target.PGA else "pgv")
                       for r in records]) / model.normalization.log_out_div
    nlog_pred = batch_normalized_log(model,
                                     np.array([r.magnitude for r in records]),
                                     np.array([r.vs30 for r in records]),
                                     np.array([r.rjb for r in records]))
    for split, idx in (("train", report.train_indices),
                       ("validation", report.validation_indices),
                       ("test", report.test_indices)):
        for i in idx:
            r = records[int(i)]
            obs = getattr(r, "pga" if model.target is Target.PGA else "pgv")
            pred = math.exp(float(nlog_pred[i]) * model.normalization.log_out_div)
            rows.append((split, r.event_id, r.station_id,
                         float(nlog_obs[i]), float(nlog_pred[i]), obs, pred))
    return rows


def _write_training_outputs(outdir: Path, records, report: trainer.TrainingReport,
                            args, config, split_spec) -> None:
    dataio.write_model(report.model, outdir / "model.json")
    summary = {
        "target": report.model.target.value,
        "stop_reason": report.stop_reason,
        "n_iterations": report.n_iterations,
        "best_validation_iteration": report.best_validation_iteration,
        "r_train": report.r_train,
        "r_validation": report.r_validation,
        "r_test": report.r_test,
        "final_train_sse": float(report.train_losses[-1]),
        "final_validation_sse": float(report.validation_losses[-1]),
        "split_sizes": {"train": int(report.train_indices.size),
                        "validation": int(report.validation_indices.size),
                        "test": int(report.test_indices.size)},
        "config": asdict(config),
        "split": asdict(split_spec),
        "normalization": asdict(report.model.normalization),
    }
    (outdir / "training_report.json").write_text(json.dumps(summary, indent=2) + "\n",
                                                 encoding="utf-8")
    dataio.write_table(outdir / "training_history.csv",
                       ["iteration", "train_sse", "validation_sse", "lambda"],
                       [(i, float(t), float(v), float(lam)) for i, (t, v, lam)
                        in enumerate(zip(report.train_losses, report.validation_losses,
                                         report.lambdas))])
    col = _value_column(report.model.target)
    scatter = _scatter_rows(records, report)
    dataio.write_table(outdir / "prediction_scatter.csv",
                       ["split", "event_id", "station_id", "observed_nlog",
                        "predicted_nlog", f"observed_{col}", f"predicted_{col}"],
                       scatter)
    if not args.no_figures:
        from . import figures
        figures.save_history_figure(report, outdir / "training_history.png")
        figures.save_scatter_figure(scatter, report.model.target,
                                    {"train": report.r_train,
                                     "validation": report.r_validation,
                                     "test": report.r_test},
                                    outdir / "prediction_scatter.png")


def cmd_train(args) -> int:
    records, _ = _read_catalog(args.catalog, args.strict)
    target = Target(args.target.upper())
    config = _train_config(args)
    split_spec = _split_spec(args)
    norm = trainer.fit_normalization(records, target) if args.fit_normalization else None
    report = trainer.train(records, target, config, split_spec, norm)
    outdir = _make_outdir(args.out)
    _write_training_outputs(outdir, records, report, args, config, split_spec)
    print(f"stop_reason={report.stop_reason}")
    print(f"iterations={report.n_iterations}")
    print(f"r_train={report.r_train:.6f}")
    print(f"r_validation={report.r_validation:.6f}")
    print(f"r_test={report.r_test:.6f}")
    print(f"model={outdir / 'model.json'}")
    return 0


# -- sweep ------------------------------------------------------------------

def cmd_sweep(args) -> int:
    if args.h_min < 1 or args.h_max < args.h_min:
        raise ValueError("require 1 <= --h-min <= --h-max")
    records, _ = _read_catalog(args.catalog, args.strict)
    target = Target(args.target.upper())
    config = _train_config(args)
    split_spec = _split_spec(args)
    norm = trainer.fit_normalization(records, target) if args.fit_normalization else None
    result = trainer.sweep_hidden_sizes(records, target, config, split_spec,
                                        range(args.h_min, args.h_max + 1),
                                        margin=args.margin, normalization=norm)
    outdir = _make_outdir(args.out)
    dataio.write_table(outdir / "sweep_summary.csv",
                       ["hidden_count", "r2_train", "r2_test", "stop_reason", "error"],
                       [(en.hidden_count,
                         None if en.failed else en.r2_train,
                         None if en.failed else en.r2_test,
                         en.stop_reason, en.error or None)
                        for en in result.entries])
    selected = result.selected
    dataio.write_model(selected.report.model, outdir / "model.json")
    (outdir / "sweep_summary.json").write_text(json.dumps({
        "selected_hidden_count": result.selected_hidden_count,
        "margin": args.margin,
        "entries": [{"hidden_count": en.hidden_count,
                     "r2_train": None if en.failed else en.r2_train,
                     "r2_test": None if en.failed else en.r2_test,
                     "stop_reason": en.stop_reason, "error": en.error or None}
                    for en in result.entries],
    }, indent=2) + "\n", encoding="utf-8")
    if not args.no_figures:
        from . import figures
        figures.save_sweep_figure(result, outdir / "sweep_summary.png")
    print(f"selected_hidden_count={result.selected_hidden_count}")
    for en in result.entries:
        if en.failed:
            print(f"H={en.hidden_count} failed: {en.error}")
        else:
            print(f"H={en.hidden_count} r2_train={en.r2_train:.6f} r2_test={en.r2_test:.6f}")
    print(f"model={outdir / 'model.json'}")
    return 0


# -- evaluate ---------------------------------------------------------------

def _parse_edges(text: str):
    try:
        edges = [float(x) for x in text.split(",")]
    except ValueError:
        raise ValueError(f"edges must be comma-separated numbers, got {text!r}")
    return edges


def cmd_evaluate(args) -> int:
    records, _ = _read_catalog(args.catalog, args.strict)
    if args.baseline:
        if args.target is None:
            raise ValueError("--baseline requires --target")
        predictor = "baseline"
        target = Target(args.target.upper())
    else:
        model = _load_model(args.model)
        target = model.target
        if args.target is not None and Target(args.target.upper()) is not target:
            raise ValueError(f"--target {args.target} conflicts with model target {target.value}")
        predictor = model
    table = analysis.residuals(records, predictor, target)
    rjb_edges = _parse_edges(args.rjb_edges) if args.rjb_edges else None
    vs30_edges = _parse_edges(args.vs30_edges) if args.vs30_edges else None
    by_rjb = analysis.bin_residuals(table, "rjb", rjb_edges)
    by_vs30 = analysis.bin_residuals(table, "vs30", vs30_edges)

    outdir = _make_outdir(args.out)
    col = _value_column(target)
    dataio.write_table(outdir / "residuals.csv",
                       ["event_id", "station_id", "mw", "vs30_mps", "rjb_km",
                        f"observed_{col}", f"predicted_{col}", "residual_ln"],
                       [(table.event_ids[i], table.station_ids[i],
                         float(table.magnitude[i]), float(table.vs30[i]),
                         float(table.rjb[i]), float(table.observed[i]),
                         float(table.predicted[i]), float(table.residuals[i]))
                        for i in range(len(table))])
    for binned, name in ((by_rjb, "residual_bins_rjb.csv"),
                         (by_vs30, "residual_bins_vs30.csv")):
        dataio.write_table(outdir / name,
                           ["bin_low", "bin_high", "count", "mean_residual",
                            "ci90_low", "ci90_high"],
                           [(b.low, b.high, b.count, b.mean, b.ci_low, b.ci_high)
                            for b in binned.bins])
    mean_res = float(table.residuals.mean()) if len(table) else float("nan")
    (outdir / "evaluation_summary.json").write_text(json.dumps({
        "predictor": table.predictor_name,
        "target": target.value,
        "n_records": len(table),
        "excluded_missing_baseline": table.excluded_count,
        "mean_residual": mean_res,
        "std_residual": float(table.residuals.std(ddof=1)) if len(table) > 1 else None,
    }, indent=2) + "\n", encoding="utf-8")
    if not args.no_figures:
        from . import figures
        figures.save_residual_figure(table, by_rjb, outdir / "residuals_rjb.png")
        figures.save_residual_figure(table, by_vs30, outdir / "residuals_vs30.png")
    print(f"predictor={table.predictor_name}")
    print(f"records={len(table)}")
    print(f"excluded_missing_baseline={table.excluded_count}")
    print(f"mean_residual={mean_res!r}")
    print(f"output={outdir}")
    return 0


# -- sensitivity ------------------------------------------------------------

def cmd_sensitivity(args) -> int:
    model = _load_model(args.model)
    importance = analysis.garson_importance(model)
    print(f"target={model.target.value}")
    for name, value in importance.as_dict().items():
        print(f"{name}={value!r}")
    if args.out is not None:
        outdir = _make_outdir(args.out)
        dataio.write_table(outdir / "importance.csv", ["input", "importance"],
                           list(importance.as_dict().items()))
        if not args.no_figures:
            from . import figures
            figures.save_importance_figure(importance, model.target,
                                           outdir / "importance.png")
        print(f"output={outdir}")
    return 0


# -- curve ------------------------------------------------------------------

def cmd_curve(args) -> int:
    model = _load_model(args.model)
    _check_units(args.units, model.target)
    if not args.mw:
        raise ValueError("give at least one --mw")
    grid = _rjb_grid(args)
    curves = [analysis.attenuation_curve(model, mw, args.vs30, grid) for mw in args.mw]

    outdir = _make_outdir(args.out)
    col = _value_column(model.target)
    header = ["mw", "vs30_mps", "rjb_km", col]
    if args.units == "g":
        header.append("pga_g")
    rows = []
    for curve in curves:
        for r, v in zip(curve.rjb, curve.values):
            row = [curve.magnitude, curve.vs30, float(r), float(v)]
            if args.units == "g":
                row.append(float(v) / STANDARD_GRAVITY_CMPS2)
            rows.append(row)
    dataio.write_table(outdir / "attenuation_curve.csv", header, rows)
    if not args.no_figures:
        from . import figures
        units_label = "g" if args.units == "g" else model.target.units
        plotted = curves
        if args.units == "g":
            plotted = [analysis.AttenuationCurve(c.target, c.magnitude, c.vs30, c.rjb,
                                                 c.values / STANDARD_GRAVITY_CMPS2)
                       for c in curves]
        figures.save_curve_figure(plotted, units_label, outdir / "attenuation_curve.png")
    print(f"curves={len(curves)}")
    print(f"points_per_curve={grid.size}")
    print(f"output={outdir / 'attenuation_curve.csv'}")
    return 0


# -- parser -----------------------------------------------------------------

def _add_catalog_options(p, with_target=True):
    p.add_argument("--catalog", required=True, help="input catalog CSV")
    if with_target:
        p.add_argument("--target", required=True, choices=["pga", "pgv"],
                       help="intensity measure to fit")
    p.add_argument("--strict", action="store_true",
                   help="fail on any bad catalog row instead of skipping it")


def _add_training_options(p):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for the split shuffle and weight init (default 0)")
    p.add_argument("--hidden", type=int, default=4, help="hidden neurons (default 4)")
    p.add_argument("--max-iterations", type=int, default=1000)
    p.add_argument("--patience", type=int, default=6,
                   help="validation checks without improvement before stopping")
    p.add_argument("--init-scale", type=float, default=0.5,
                   help="half-width of the uniform weight initialization")
    p.add_argument("--train-fraction", type=float, default=0.60)
    p.add_argument("--validation-fraction", type=float, default=0.20)
    p.add_argument("--test-fraction", type=float, default=0.20)
    p.add_argument("--fit-normalization", action="store_true",
                   help="derive input/output divisors from the catalog instead "
                        "of using the published constants")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmpe-ann",
        description="Neural-network ground-motion prediction toolkit for PGA and PGV.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="evaluate a model at a point or over a catalog")
    p.add_argument("--model", required=True,
                   help="published-pga, published-pgv, or file:<path>")
    p.add_argument("--mw", type=float, help="moment magnitude")
    p.add_argument("--vs30", type=float, help="site shear-wave velocity, m/s")
    p.add_argument("--rjb", type=float, help="Joyner-Boore distance, km")
    p.add_argument("--catalog", help="catalog CSV for batch prediction")
    p.add_argument("--out", help="output CSV for batch prediction")
    p.add_argument("--units", choices=["cmps2", "g"], default="cmps2",
                   help="display units for PGA (default cmps2)")
    p.add_argument("--strict", action="store_true",
                   help="fail on any bad catalog row instead of skipping it")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("train", help="fit a network to a catalog")
    _add_catalog_options(p)
    _add_training_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="train across hidden sizes and pick the smallest adequate one")
    _add_catalog_options(p)
    _add_training_options(p)
    p.add_argument("--h-min", type=int, default=1)
    p.add_argument("--h-max", type=int, default=10)
    p.add_argument("--margin", type=float, default=0.01,
                   help="test R^2 slack when picking the smallest hidden size")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="residual analysis of a model or baseline columns")
    p.add_argument("--catalog", required=True, help="input catalog CSV")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model", help="published-pga, published-pgv, or file:<path>")
    group.add_argument("--baseline", action="store_true",
                       help="use the catalog's baseline_* columns as the predictor")
    p.add_argument("--target", choices=["pga", "pgv"],
                   help="intensity measure (required with --baseline)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--rjb-edges", help="comma-separated distance bin edges, km")
    p.add_argument("--vs30-edges", help="comma-separated Vs30 bin edges, m/s")
    p.add_argument("--strict", action="store_true",
                   help="fail on any bad catalog row instead of skipping it")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sensitivity", help="input-variable importance of a model")
    p.add_argument("--model", required=True,
                   help="published-pga, published-pgv, or file:<path>")
    p.add_argument("--out", help="optional output directory")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("curve", help="attenuation curve over a distance grid")
    p.add_argument("--model", required=True,
                   help="published-pga, published-pgv, or file:<path>")
    p.add_argument("--mw", type=float, action="append",
                   help="moment magnitude; repeat for several curves")
    p.add_argument("--vs30", type=float, default=760.0,
                   help="site shear-wave velocity, m/s (default 760)")
    p.add_argument("--rjb-min", type=float, default=4.0)
    p.add_argument("--rjb-max", type=float, default=500.0)
    p.add_argument("--rjb-points", type=int, default=60)
    p.add_argument("--rjb-spacing", choices=["log", "linear"], default="log")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--units", choices=["cmps2", "g"], default="cmps2",
                   help="display units for PGA (default cmps2)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_curve)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputDomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2 if args.command == "predict" else 3
    except (CatalogError, ModelFormatError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (TrainingError, AnalysisError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
