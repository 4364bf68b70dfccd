"""Spectral density models for zero-mean stationary Gaussian processes.

Every model is a strictly positive, bounded density on [0, pi].  The
normalization ties the density to the autocovariance through

    gamma(h) = integral_0^1 f(pi * x) * cos(h * pi * x) dx,

so for instance the AR(1) density ``(2*pi)^-1 / (1 - 2*phi*cos(x) + phi^2)``
has gamma(h) = (2*pi)^-1 * phi^|h| / (1 - phi^2).

The module also provides the catalog of simulation settings used by the
experiment harness: each setting pairs a base density ``f1`` with an
alternative ``ftilde``, and the second sample's density is the convex
combination ``(1 - delta) * f1 + delta * ftilde``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

__all__ = [
    "SpectralModel",
    "AR1",
    "AR2",
    "MA1",
    "CosinePower",
    "Mixture",
    "Tabulated",
    "Autocovariance",
    "QuadratureError",
    "constant_model",
    "eval_sdf",
    "autocovariance",
    "make_setting",
    "setting_penalty_order",
    "model_from_dict",
]

_TWO_PI = 2.0 * np.pi


class QuadratureError(RuntimeError):
    """Raised when the autocovariance quadrature fails to converge."""


class SpectralModel:
    """Base class for spectral densities on [0, pi]."""

    variant = "abstract"

    def density(self, x):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        params = ", ".join(f"{k}={v!r}" for k, v in self.to_dict()["parameters"].items())
        return f"{type(self).__name__}({params})"


@dataclass(frozen=True, repr=False)
class AR1(SpectralModel):
    """First-order autoregression, |phi| < 1."""

    phi: float
    variant = "ar1"

    def __post_init__(self):
        if not abs(self.phi) < 1.0:
            raise ValueError(f"AR(1) requires |phi| < 1, got phi={self.phi}")

    def density(self, x):
        return (1.0 / _TWO_PI) / (1.0 - 2.0 * self.phi * np.cos(x) + self.phi**2)

    def to_dict(self) -> dict:
        return {"variant": "ar1", "parameters": {"phi": self.phi}}


@dataclass(frozen=True, repr=False)
class AR2(SpectralModel):
    """Second-order autoregression inside the stationarity triangle."""

    phi1: float
    phi2: float
    variant = "ar2"

    def __post_init__(self):
        ok = abs(self.phi2) < 1.0 and self.phi1 + self.phi2 < 1.0 and self.phi2 - self.phi1 < 1.0
        if not ok:
            raise ValueError(
                f"AR(2) stationarity violated for phi1={self.phi1}, phi2={self.phi2}"
            )

    def density(self, x):
        d = (
            1.0
            + self.phi1**2
            + self.phi2**2
            + 2.0 * self.phi1 * (self.phi2 - 1.0) * np.cos(x)
            - 2.0 * self.phi2 * np.cos(2.0 * x)
        )
        return (1.0 / _TWO_PI) / d

    def to_dict(self) -> dict:
        return {"variant": "ar2", "parameters": {"phi1": self.phi1, "phi2": self.phi2}}


@dataclass(frozen=True, repr=False)
class MA1(SpectralModel):
    """First-order moving average; |theta| != 1 keeps the density positive."""

    theta: float
    variant = "ma1"

    def __post_init__(self):
        if abs(abs(self.theta) - 1.0) < 1e-12:
            raise ValueError(f"MA(1) density vanishes for |theta| = 1, got theta={self.theta}")

    def density(self, x):
        return (1.0 / _TWO_PI) * (1.0 + 2.0 * self.theta * np.cos(x) + self.theta**2)

    def to_dict(self) -> dict:
        return {"variant": "ma1", "parameters": {"theta": self.theta}}


@dataclass(frozen=True, repr=False)
class CosinePower(SpectralModel):
    """Density ``scale * (|cos(x/2 - phase_shift)|^exponent + offset)``.

    ``offset > 0`` keeps the density strictly positive at the cosine zero.
    """

    exponent: float
    phase_shift: float = 0.0
    offset: float = 0.45
    scale: float = 1.0 / _TWO_PI
    variant = "cosine_power"

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.offset <= 0:
            raise ValueError("offset must be positive for strict positivity")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def density(self, x):
        return self.scale * (
            np.abs(np.cos(np.asarray(x) / 2.0 - self.phase_shift)) ** self.exponent + self.offset
        )

    def to_dict(self) -> dict:
        return {
            "variant": "cosine_power",
            "parameters": {
                "exponent": self.exponent,
                "phase_shift": self.phase_shift,
                "offset": self.offset,
                "scale": self.scale,
            },
        }


@dataclass(frozen=True, repr=False, eq=False)
class Mixture(SpectralModel):
    """Convex combination ``(1 - delta) * left + delta * right``."""

    delta: float
    left: SpectralModel
    right: SpectralModel
    variant = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"mixture weight must lie in [0, 1], got {self.delta}")

    def density(self, x):
        return (1.0 - self.delta) * self.left.density(x) + self.delta * self.right.density(x)

    def to_dict(self) -> dict:
        return {
            "variant": "mixture",
            "parameters": {
                "delta": self.delta,
                "left": self.left.to_dict(),
                "right": self.right.to_dict(),
            },
        }


class Tabulated(SpectralModel):
    """Linear interpolation of positive values at equispaced points of [0, 1].

    ``density(x)`` interpolates at ``x / pi``; outside the grid the boundary
    value is held constant.
    """

    variant = "tabulated"

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("tabulated model needs at least two grid values")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("tabulated values must be finite and strictly positive")
        self.values = values
        self.grid = np.linspace(0.0, 1.0, values.size)

    def density(self, x):
        return np.interp(np.asarray(x) / np.pi, self.grid, self.values)

    def to_dict(self) -> dict:
        return {"variant": "tabulated", "parameters": {"values": self.values.tolist()}}


def constant_model(level: float = 1.0) -> Tabulated:
    """White-noise density f == level."""
    return Tabulated([level, level])


def model_from_dict(d: dict) -> SpectralModel:
    """Inverse of ``SpectralModel.to_dict`` for JSON configs."""
    variant = d["variant"]
    p = d["parameters"]
    if variant == "ar1":
        return AR1(p["phi"])
    if variant == "ar2":
        return AR2(p["phi1"], p["phi2"])
    if variant == "ma1":
        return MA1(p["theta"])
    if variant == "cosine_power":
        return CosinePower(p["exponent"], p["phase_shift"], p["offset"], p["scale"])
    if variant == "mixture":
        return Mixture(p["delta"], model_from_dict(p["left"]), model_from_dict(p["right"]))
    if variant == "tabulated":
        return Tabulated(p["values"])
    raise ValueError(f"unknown model variant {variant!r}")


def eval_sdf(model: SpectralModel, x) -> np.ndarray | float:
    """Evaluate a spectral density at ``x`` in [0, pi]."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > np.pi):
        raise ValueError("spectral densities are defined on [0, pi]")
    out = model.density(x)
    if np.any(~np.isfinite(out)) or np.any(out <= 0):
        raise ValueError("density evaluated non-positive or non-finite")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Autocovariance:
    """Autocovariances gamma(0..max_lag) of a stationary process."""

    values: np.ndarray
    max_lag: int

    def __post_init__(self):
        if self.values.shape != (self.max_lag + 1,):
            raise ValueError("autocovariance length must be max_lag + 1")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("autocovariances must be finite")

    def __getitem__(self, h: int) -> float:
        return float(self.values[abs(h)])


def _simpson_cosine_moments(fx: np.ndarray, max_lag: int) -> np.ndarray:
    """Composite-Simpson values of integral f(pi x) cos(h pi x) dx, h = 0..max_lag.

    ``fx`` holds f(pi * i/nq) for i = 0..nq with nq even.  The cosine sums for
    all lags at once are a type-1 DCT of the weighted samples.
    """
    nq = fx.size - 1
    w = np.ones(nq + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    v = w * fx
    y = dct(v, type=1)  # y_k = v_0 + (-1)^k v_nq + 2 sum_{1..nq-1} v_i cos(pi i k / nq)
    k = np.arange(max_lag + 1)
    sums = 0.5 * (y[: max_lag + 1] + v[0] + np.where(k % 2 == 0, v[-1], -v[-1]))
    return sums / (3.0 * nq)


def autocovariance(model: SpectralModel, max_lag: int, quad_points: int = 4096) -> Autocovariance:
    """Autocovariances by composite Simpson quadrature with dyadic refinement.

    Refines until the largest change across lags falls below 1e-8 relative to
    gamma(0); raises :class:`QuadratureError` if the cap is hit first.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    if quad_points < 256:
        raise ValueError("quad_points must be at least 256")
    # at least four quadrature panels per cosine period at the largest lag
    nq = int(max(quad_points, 4 * max_lag, 256))
    if nq % 2:
        nq += 1
    cap = max(2**22, 4 * nq)
    xs = np.linspace(0.0, 1.0, nq + 1)
    fx = np.asarray(model.density(np.pi * xs), dtype=float)
    prev = _simpson_cosine_moments(fx, max_lag)
    while True:
        nq *= 2
        xs = np.linspace(0.0, 1.0, nq + 1)
        fx_new = np.empty(nq + 1)
        fx_new[::2] = fx
        fx_new[1::2] = model.density(np.pi * xs[1::2])
        fx = fx_new
        cur = _simpson_cosine_moments(fx, max_lag)
        scale = max(abs(cur[0]), np.finfo(float).tiny)
        if np.max(np.abs(cur - prev)) <= 1e-8 * scale:
            return Autocovariance(values=cur, max_lag=max_lag)
        if nq >= cap:
            raise QuadratureError(
                f"autocovariance quadrature did not converge by {nq} panels "
                f"(relative change {np.max(np.abs(cur - prev)) / scale:.3e})"
            )
        prev = cur


# ---------------------------------------------------------------------------
# Simulation-study settings
# ---------------------------------------------------------------------------

def _setting_pair(setting_id: int, source: str) -> tuple[SpectralModel, SpectralModel, int]:
    if source == "main":
        if setting_id == 1:
            return AR1(0.5), AR1(0.8), 6
        if setting_id == 2:
            return (
                CosinePower(1.3, 0.0, 0.45, 1.0 / _TWO_PI),
                AR2(0.3, -0.5),
                1,
            )
        if setting_id == 3:
            return (
                CosinePower(5.1, 0.0, 0.45, 1.0 / _TWO_PI),
                CosinePower(5.1, 0.2 * np.pi, 0.45, 1.0 / _TWO_PI),
                5,
            )
    elif source == "supplement":
        phi = 0.8
        if setting_id == 1:
            return AR1(phi), MA1(phi / np.sqrt(1.0 - phi**2)), 4
        base = CosinePower(5.1, 0.0, 0.45, 1.44 / _TWO_PI)
        shifted = CosinePower(3.1, 0.2 * np.pi, 0.45, 1.44 / _TWO_PI)
        if setting_id == 2:
            return base, shifted, 4
        if setting_id == 3:
            return base, Mixture(0.3, base, shifted), 4
    raise ValueError(f"unknown setting ({setting_id!r}, {source!r})")


def make_setting(
    setting_id: int, source: str = "main", delta: float = 0.0
) -> tuple[SpectralModel, SpectralModel]:
    """Return (f1, f2_delta) for a catalog setting.

    ``f2_delta`` is the convex combination (1 - delta) * f1 + delta * ftilde
    of the setting's base and alternative densities.
    """
    f1, ftilde, _ = _setting_pair(setting_id, source)
    return f1, Mixture(delta, f1, ftilde)


@lru_cache(maxsize=None)
def setting_penalty_order(setting_id: int, source: str = "main") -> int:
    """Spline penalty order used with a catalog setting."""
    return _setting_pair(setting_id, source)[2]
