"""Command-line interface.

Subcommands:

    test       compare two series from CSV files
    estimate   estimate one series' spectral density, written as plot-ready CSV
    simulate   draw stationary Gaussian series from a catalog or JSON model
    type1      null rejection rate for a simulation setting
    power      power curve over the mixture-weight grid
    roc        ROC sweep of the raw statistic

Every run writes a manifest JSON echoing the resolved configuration, so a
run can be reproduced byte-for-byte from its manifest.  Exit codes: 0 on
completion (the test decision lives in the report), 2 on usage or input
errors, 3 on numerical failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .equality import FixedBandwidths, TestConfig, run_test
from .experiments import (
    SCENARIOS,
    ExperimentConfig,
    run_power_curve,
    run_roc,
    run_type1,
    write_manifest,
)
from .models import (
    AR1,
    AR2,
    MA1,
    CosinePower,
    QuadratureError,
    constant_model,
    make_setting,
    model_from_dict,
    setting_penalty_order,
)
from .simulate import CirculantSampler, SamplerState
from .smoother import select_bandwidth
from .transform import plan_bins, transform


def _read_series(path: str, column: str | None) -> np.ndarray:
    """One numeric column from a CSV file; optional header row."""
    rows: list[list[str]] = []
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise click.UsageError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise click.UsageError(f"{path} is empty")

    header: list[str] | None = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise click.UsageError(f"{path} has a header but no data")

    idx = 0
    if column is not None:
        if header is not None and column in header:
            idx = header.index(column)
        else:
            try:
                idx = int(column)
            except ValueError:
                raise click.UsageError(
                    f"column {column!r} not found in {path}"
                    + (f" (columns: {header})" if header else "")
                )
    try:
        values = np.array([float(r[idx]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise click.UsageError(f"non-numeric or missing cell in {path}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise click.UsageError(f"{path} contains non-finite values")
    return values


def _selection(select: str, h1: float | None, h2: float | None):
    if select == "fixed":
        if h1 is None:
            raise click.UsageError("--select fixed requires --h1 (and --h2 for two series)")
        return FixedBandwidths(h1, h2 if h2 is not None else h1)
    return select


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


@click.group()
def main() -> None:
    """Spectral-density equality testing for stationary Gaussian time series."""


def _numeric_guard(fn):
    """Translate numerical failures into exit code 3."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (QuadratureError, np.linalg.LinAlgError, FloatingPointError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(3)

    return wrapper


@main.command("test")
@click.argument("series1", type=click.Path(exists=True, dir_okay=False))
@click.argument("series2", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", default=None, help="Column name or index to read (default: first).")
@click.option("--bins", type=int, default=None, help="Shared bin count T (default: automatic).")
@click.option("--q", type=int, default=4, show_default=True, help="Spline penalty order.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--mc", type=int, default=500, show_default=True, help="Calibration replicates.")
@click.option("--select", type=click.Choice(["gcv", "gml", "fixed"]), default="gcv",
              show_default=True)
@click.option("--h1", type=float, default=None, help="Bandwidth for series 1 (fixed mode).")
@click.option("--h2", type=float, default=None, help="Bandwidth for series 2 (fixed mode).")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--center/--no-center", default=True, show_default=True,
              help="Subtract the sample mean before testing.")
@click.option("--clip-sd", type=float, default=None,
              help="Drop observations more than this many standard deviations out.")
@click.option("--out", type=click.Path(dir_okay=False), default="test_report.json",
              show_default=True)
@click.option("--null-csv", type=click.Path(dir_okay=False), default=None,
              help="Optionally write the sorted null statistics to CSV.")
@_numeric_guard
def cmd_test(series1, series2, column, bins, q, alpha, mc, select, h1, h2, seed,
             center, clip_sd, out, null_csv):
    """Test whether two series share one spectral density."""
    x1 = _read_series(series1, column)
    x2 = _read_series(series2, column)
    config = TestConfig(
        alpha=alpha, q=q, T=bins, mc_replicates=mc,
        selection=_selection(select, h1, h2), seed=seed,
        center=center, clip_sd=clip_sd,
    )
    try:
        outcome = run_test(x1, x2, config)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(f"statistic        S = {outcome.statistic:.6g}")
    click.echo(f"critical value   H = {outcome.critical_value:.6g} (alpha = {alpha})")
    click.echo(f"p-value            = {outcome.p_value:.6g}")
    click.echo(f"decision           = {'reject' if outcome.reject else 'no rejection'}")
    report = outcome.to_dict()
    report["inputs"] = {"series1": str(series1), "series2": str(series2), "column": column}
    _write_json(out, report)
    outputs = [out]
    if null_csv:
        np.savetxt(null_csv, outcome.null_sample, fmt="%.17g", header="null_statistic",
                   comments="")
        outputs.append(null_csv)
    write_manifest(str(out) + ".manifest.json", "test", report["config"] | report["inputs"],
                   seed, outputs)


@main.command("estimate")
@click.argument("series", type=click.Path(exists=True, dir_okay=False))
@click.option("--column", default=None)
@click.option("--bins", type=int, default=None, help="Bin count T (default: automatic).")
@click.option("--q", type=int, default=4, show_default=True)
@click.option("--select", type=click.Choice(["gcv", "gml", "fixed"]), default="gcv",
              show_default=True)
@click.option("--h", type=float, default=None, help="Bandwidth (fixed mode).")
@click.option("--center/--no-center", default=True, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="sdf_estimate.csv",
              show_default=True)
@_numeric_guard
def cmd_estimate(series, column, bins, q, select, h, center, out):
    """Estimate one series' spectral density on [0, pi] (CSV: x, ghat, fhat)."""
    x = _read_series(series, column)
    if center:
        x = x - x.mean()
    n = x.size
    try:
        plan = plan_bins(n, n, bins)
        ts = transform(x, plan)
        if select == "fixed":
            if h is None or h <= 0:
                raise click.UsageError("--select fixed requires a positive --h")
            est = select_bandwidth(ts.ystar, ts.ntilde, q, method="fixed", fixed_h=h)
        else:
            est = select_bandwidth(ts.ystar, ts.ntilde, q, method=select)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    # first T mirrored points run from frequency pi down to 0; reverse them
    ghat = est.ghat[: ts.T][::-1]
    fhat = np.exp(np.sqrt(2.0) * ghat)
    grid = np.linspace(0.0, 1.0, ts.T)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "ghat", "fhat"])
        for g, gh, fv in zip(grid, ghat, fhat):
            writer.writerow([f"{g:.10g}", f"{gh:.17g}", f"{fv:.17g}"])
    click.echo(f"T = {ts.T} bins of mass {ts.m}; h = {est.h_selected:.6g} ({est.method})")
    config = {
        "bins": ts.T, "q": q, "method": est.method, "h_selected": est.h_selected,
        "center": center, "column": column, "series": str(series),
    }
    write_manifest(str(out) + ".manifest.json", "estimate", config, 0, [out])


_MODEL_BUILDERS = {
    "ar1": lambda p: AR1(p["phi"]),
    "ar2": lambda p: AR2(p["phi1"], p["phi2"]),
    "ma1": lambda p: MA1(p["theta"]),
    "cospow": lambda p: CosinePower(p["exponent"], p["phase"], p["offset"], p["scale"]),
    "white": lambda p: constant_model(p["level"]),
}


@main.command("simulate")
@click.option("--model", type=click.Choice(sorted(_MODEL_BUILDERS)), default=None)
@click.option("--model-json", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON file with a serialized model ({variant, parameters}).")
@click.option("--phi", type=float, default=0.5, show_default=True)
@click.option("--phi1", type=float, default=0.3)
@click.option("--phi2", type=float, default=-0.5)
@click.option("--theta", type=float, default=0.5)
@click.option("--exponent", type=float, default=5.1)
@click.option("--phase", type=float, default=0.0)
@click.option("--offset", type=float, default=0.45)
@click.option("--scale", type=float, default=1.0 / (2 * np.pi))
@click.option("--level", type=float, default=1.0, help="White-noise density level.")
@click.option("--n", type=int, required=True, help="Series length.")
@click.option("--reps", type=int, default=1, show_default=True, help="Number of series.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="simulated.csv",
              show_default=True)
@_numeric_guard
def cmd_simulate(model, model_json, phi, phi1, phi2, theta, exponent, phase, offset,
                 scale, level, n, reps, seed, out):
    """Sample zero-mean stationary Gaussian series (one per CSV column)."""
    if (model is None) == (model_json is None):
        raise click.UsageError("give exactly one of --model or --model-json")
    params = {
        "phi": phi, "phi1": phi1, "phi2": phi2, "theta": theta, "exponent": exponent,
        "phase": phase, "offset": offset, "scale": scale, "level": level,
    }
    try:
        if model_json is not None:
            with open(model_json) as fh:
                spec = json.load(fh)
            sdf = model_from_dict(spec)
            label = sdf.variant
        else:
            sdf = _MODEL_BUILDERS[model](params)
            label = model
    except (ValueError, KeyError) as exc:
        raise click.UsageError(f"bad model: {exc}") from exc
    if n < 2:
        raise click.UsageError("need n >= 2")
    sampler = CirculantSampler(sdf, n)
    block = sampler.sample_block([SamplerState(seed, r) for r in range(reps)])
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{label}_r{r}" for r in range(reps)])
        for row in block.T:
            writer.writerow([f"{v:.17g}" for v in row])
    config = {"model": sdf.to_dict(), "n": n, "reps": reps}
    write_manifest(str(out) + ".manifest.json", "simulate", config, seed, [out])


def _experiment_config(config_file, setting, source, scenario, reps, mc, alpha, q,
                       bins, select, h1, h2, seed, workers, deltas=None) -> ExperimentConfig:
    if config_file is not None:
        with open(config_file) as fh:
            payload = json.load(fh)
        cfg = payload["config"] if "config" in payload else payload
        test_d = dict(cfg["test"])
        sel = test_d["selection"]
        if isinstance(sel, dict):
            test_d["selection"] = FixedBandwidths(sel["h1"], sel["h2"])
        return ExperimentConfig(
            setting_id=cfg["setting_id"], source=cfg["source"], scenario=cfg["scenario"],
            delta_grid=tuple(cfg["delta_grid"]), reps=cfg["reps"],
            test=TestConfig(**test_d), workers=cfg.get("workers", 1),
        )
    if q is None:
        q = setting_penalty_order(setting, source)
    test = TestConfig(
        alpha=alpha, q=q, T=bins, mc_replicates=mc,
        selection=_selection(select, h1, h2), seed=seed,
    )
    kwargs = dict(
        setting_id=setting, source=source, scenario=scenario, reps=reps,
        test=test, workers=workers,
    )
    if deltas is not None:
        kwargs["delta_grid"] = deltas
    return ExperimentConfig(**kwargs)


_experiment_options = [
    click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="JSON config (or manifest) overriding all flags."),
    click.option("--setting", type=int, default=1, show_default=True),
    click.option("--source", type=click.Choice(["main", "supplement"]), default="main",
                 show_default=True),
    click.option("--scenario", type=click.Choice(sorted(SCENARIOS)), default="B",
                 show_default=True),
    click.option("--reps", type=int, default=100, show_default=True),
    click.option("--mc", type=int, default=500, show_default=True),
    click.option("--alpha", type=float, default=0.05, show_default=True),
    click.option("--q", type=int, default=None, help="Penalty order (default: per setting)."),
    click.option("--bins", type=int, default=None, help="Bin count (default: per scenario)."),
    click.option("--select", type=click.Choice(["gcv", "gml", "fixed"]), default="gcv",
                 show_default=True),
    click.option("--h1", type=float, default=None),
    click.option("--h2", type=float, default=None),
    click.option("--seed", type=int, default=42, show_default=True),
    click.option("--workers", type=int, default=1, show_default=True),
]


def _with_options(options):
    def deco(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return deco


@main.command("type1")
@_with_options(_experiment_options)
@click.option("--out", type=click.Path(dir_okay=False), default="type1.csv", show_default=True)
@_numeric_guard
def cmd_type1(config_file, setting, source, scenario, reps, mc, alpha, q, bins, select,
              h1, h2, seed, workers, out):
    """Null rejection rate of a simulation setting."""
    config = _experiment_config(config_file, setting, source, scenario, reps, mc, alpha,
                                q, bins, select, h1, h2, seed, workers, deltas=(0.0,))
    rate, se = run_type1(config)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "rejection_rate", "reps", "mc_se"])
        writer.writerow([config.test.alpha, f"{rate:.10g}", config.reps, f"{se:.10g}"])
    click.echo(f"type-I rejection rate = {rate:.4f} (se {se:.4f})")
    write_manifest(str(out) + ".manifest.json", "type1", config.to_dict(),
                   config.test.seed, [out])


@main.command("power")
@_with_options(_experiment_options)
@click.option("--deltas", default=None,
              help="Comma-separated mixture weights (default: 0,0.1,...,1).")
@click.option("--out", type=click.Path(dir_okay=False), default="power.csv", show_default=True)
@_numeric_guard
def cmd_power(config_file, setting, source, scenario, reps, mc, alpha, q, bins, select,
              h1, h2, seed, workers, deltas, out):
    """Power curve over the mixture-weight grid."""
    grid = None
    if deltas is not None:
        try:
            grid = tuple(float(v) for v in deltas.split(","))
        except ValueError as exc:
            raise click.UsageError(f"bad --deltas: {exc}") from exc
    config = _experiment_config(config_file, setting, source, scenario, reps, mc, alpha,
                                q, bins, select, h1, h2, seed, workers, deltas=grid)
    curve = run_power_curve(config)
    curve.write_csv(out)
    for d, r in zip(curve.deltas, curve.rates):
        click.echo(f"delta = {d:4.2f}  power = {r:.4f}")
    write_manifest(str(out) + ".manifest.json", "power", config.to_dict(),
                   config.test.seed, [out])


@main.command("roc")
@_with_options(_experiment_options)
@click.option("--pairs", type=int, default=200, show_default=True,
              help="Sampled pairs per hypothesis.")
@click.option("--delta", type=float, default=1.0, show_default=True,
              help="Mixture weight of the alternative pool.")
@click.option("--out", type=click.Path(dir_okay=False), default="roc.csv", show_default=True)
@_numeric_guard
def cmd_roc(config_file, setting, source, scenario, reps, mc, alpha, q, bins, select,
            h1, h2, seed, workers, pairs, delta, out):
    """ROC sweep of the raw statistic (no Monte Carlo calibration needed)."""
    config = _experiment_config(config_file, setting, source, scenario, reps, mc, alpha,
                                q, bins, select, h1, h2, seed, workers)
    try:
        curve = run_roc(config.setting_id, config.source, config.scenario, pairs,
                        config.test, delta=delta)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    curve.write_csv(out)
    click.echo(f"AUC = {curve.auc:.4f} over {pairs} pairs per hypothesis")
    manifest_cfg = config.to_dict() | {"pairs": pairs, "delta": delta}
    write_manifest(str(out) + ".manifest.json", "roc", manifest_cfg,
                   config.test.seed, [out])


if __name__ == "__main__":  # pragma: no cover
    main()
