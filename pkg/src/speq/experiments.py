"""Simulation experiments: type-I error, power curves, and ROC analysis.

Scenarios name the sample-size pairs used throughout:

    A  = (1200, 350)    unbalanced, T = 143
    B  = (1200, 1000)   both long,  T = 143
    B' = (1024, 1024)   equal,      T = 256

Each replicate draws its data from Philox streams derived from the
experiment seed and the replicate's position, and each test run gets its own
derived calibration seed, so results are reproducible and independent of the
worker count used to spread replicates over processes.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .equality import TestConfig, run_test
from .models import make_setting, setting_penalty_order
from .simulate import CirculantSampler, SamplerState, derive_seed
from .smoother import BandwidthSearch
from .transform import plan_bins, transform_block

__all__ = [
    "SCENARIOS",
    "SCENARIO_BINS",
    "ExperimentConfig",
    "PowerCurve",
    "RocCurve",
    "run_type1",
    "run_power_curve",
    "run_roc",
    "write_manifest",
]

SCENARIOS = {"A": (1200, 350), "B": (1200, 1000), "B'": (1024, 1024)}
SCENARIO_BINS = {"A": 143, "B": 143, "B'": 256}

_DELTA_GRID = tuple(np.round(np.arange(0.0, 1.01, 0.1), 10))

# stream-purpose tags for seed derivation
_TAG_DATA = 0
_TAG_TEST = 1
_TAG_ROC = 2


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation experiment: setting, scenario, grid and test knobs."""

    setting_id: int = 1
    source: str = "main"
    scenario: str = "B"
    delta_grid: tuple = _DELTA_GRID
    reps: int = 100
    test: TestConfig = TestConfig()
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; use one of {list(SCENARIOS)}")
        if self.reps < 10:
            raise ValueError("need at least 10 replicates per grid point")
        grid = tuple(float(d) for d in self.delta_grid)
        if any(not 0.0 <= d <= 1.0 for d in grid):
            raise ValueError("mixture weights must lie in [0, 1]")
        if list(grid) != sorted(grid):
            raise ValueError("delta_grid must be sorted ascending")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        object.__setattr__(self, "delta_grid", grid)
        # resolve scenario/setting defaults into the test config
        test = self.test
        if test.T is None:
            test = replace(test, T=SCENARIO_BINS[self.scenario])
        object.__setattr__(self, "test", test)

    @property
    def sizes(self) -> tuple[int, int]:
        return SCENARIOS[self.scenario]

    def to_dict(self) -> dict:
        return {
            "setting_id": self.setting_id,
            "source": self.source,
            "scenario": self.scenario,
            "delta_grid": list(self.delta_grid),
            "reps": self.reps,
            "test": self.test.to_dict(),
            "workers": self.workers,
        }


def default_test_config(setting_id: int, source: str = "main", **overrides) -> TestConfig:
    """Test config with the setting's penalty order filled in."""
    overrides.setdefault("q", setting_penalty_order(setting_id, source))
    return TestConfig(**overrides)


@dataclass(frozen=True, eq=False)
class PowerCurve:
    """Rejection rate per mixture weight with its binomial standard error."""

    deltas: np.ndarray
    rates: np.ndarray
    reps: int

    @property
    def mc_se(self) -> np.ndarray:
        return np.sqrt(self.rates * (1.0 - self.rates) / self.reps)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["delta", "rejection_rate", "reps", "mc_se"])
            for d, r, se in zip(self.deltas, self.rates, self.mc_se):
                writer.writerow([f"{d:.10g}", f"{r:.10g}", self.reps, f"{se:.10g}"])


def _one_replicate(config: ExperimentConfig, delta_idx: int, rep: int) -> bool:
    delta = config.delta_grid[delta_idx]
    f1, f2 = make_setting(config.setting_id, config.source, delta)
    n1, n2 = config.sizes
    pair_seed = derive_seed(config.test.seed, _TAG_DATA, delta_idx, rep)
    x1 = CirculantSampler(f1, n1).sample(SamplerState(pair_seed, 0))
    x2 = CirculantSampler(f2, n2).sample(SamplerState(pair_seed, 1))
    test_cfg = replace(config.test, seed=derive_seed(config.test.seed, _TAG_TEST, delta_idx, rep))
    return run_test(x1, x2, test_cfg).reject


def _replicate_task(args) -> tuple[int, int, bool]:
    config, delta_idx, rep = args
    return delta_idx, rep, _one_replicate(config, delta_idx, rep)


def run_power_curve(config: ExperimentConfig) -> PowerCurve:
    """Rejection rate over the delta grid, reps independent pairs per point."""
    tasks = [
        (config, di, r) for di in range(len(config.delta_grid)) for r in range(config.reps)
    ]
    rejects = np.zeros((len(config.delta_grid), config.reps), dtype=bool)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for di, r, rej in pool.map(_replicate_task, tasks, chunksize=4):
                rejects[di, r] = rej
    else:
        for task in tasks:
            di, r, rej = _replicate_task(task)
            rejects[di, r] = rej
    return PowerCurve(
        deltas=np.asarray(config.delta_grid),
        rates=rejects.mean(axis=1),
        reps=config.reps,
    )


def run_type1(config: ExperimentConfig) -> tuple[float, float]:
    """Rejection rate under the null (delta = 0) and its standard error."""
    curve = run_power_curve(replace(config, delta_grid=(0.0,)))
    return float(curve.rates[0]), float(curve.mc_se[0])


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Threshold sweep over pooled null/alternative statistics."""

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    null_stats: np.ndarray
    alt_stats: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fpr", "tpr"])
            for f, t in zip(self.fpr, self.tpr):
                writer.writerow([f"{f:.10g}", f"{t:.10g}"])


def _statistics_pool(
    config: ExperimentConfig, delta: float, n_pairs: int, tag: int
) -> np.ndarray:
    """Raw statistics of n_pairs (f1, f2_delta) draws; no calibration needed."""
    f1, f2 = make_setting(config.setting_id, config.source, delta)
    n1, n2 = config.sizes
    T = config.test.T
    plan = plan_bins(n1, n2, T)
    sampler1 = CirculantSampler(f1, n1)
    sampler2 = CirculantSampler(f2, n2)
    search = BandwidthSearch(2 * plan.T - 2, config.test.q)
    seeds = [derive_seed(config.test.seed, _TAG_ROC, tag, r) for r in range(n_pairs)]
    X1 = sampler1.sample_block([SamplerState(s, 0) for s in seeds])
    X2 = sampler2.sample_block([SamplerState(s, 1) for s in seeds])
    Y1 = transform_block(X1, plan.T)
    Y2 = transform_block(X2, plan.T)
    sel = config.test.selection
    if isinstance(sel, str):
        G1, _, _ = search.select_block(Y1, sel)
        G2, _, _ = search.select_block(Y2, sel)
    else:
        G1 = search.smooth_fixed(Y1, sel.h1)
        G2 = search.smooth_fixed(Y2, sel.h2)
    return np.mean((G1 - G2) ** 2, axis=1)


def run_roc(
    setting_id: int,
    source: str,
    scenario: str,
    n_pairs: int,
    test_config: TestConfig,
    delta: float = 1.0,
) -> RocCurve:
    """ROC of the raw statistic: null pairs share f1, alternative pairs use f2.

    Sweeps the rejection threshold over the pooled statistics and returns the
    (fpr, tpr) staircase with its trapezoidal area.
    """
    if n_pairs < 50:
        raise ValueError("need at least 50 pairs per hypothesis")
    config = ExperimentConfig(
        setting_id=setting_id,
        source=source,
        scenario=scenario,
        delta_grid=(0.0, delta) if delta > 0 else (0.0,),
        reps=max(n_pairs, 10),
        test=test_config,
    )
    null_stats = _statistics_pool(config, 0.0, n_pairs, 0)
    alt_stats = _statistics_pool(config, delta, n_pairs, 1)
    thresholds = np.unique(np.concatenate([null_stats, alt_stats]))[::-1]
    fpr = [0.0]
    tpr = [0.0]
    for t in thresholds:
        fpr.append(np.mean(null_stats > t))
        tpr.append(np.mean(alt_stats > t))
    fpr.append(1.0)
    tpr.append(1.0)
    fpr = np.asarray(fpr)
    tpr = np.asarray(tpr)
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(fpr=fpr, tpr=tpr, auc=auc, null_stats=np.sort(null_stats),
                    alt_stats=np.sort(alt_stats))


def write_manifest(path, command: str, config: dict, seed: int, outputs: list) -> None:
    """Record the resolved configuration next to an experiment's outputs."""
    import scipy

    from . import __version__

    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "versions": {
            "speq": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": [str(Path(p)) for p in outputs],
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
