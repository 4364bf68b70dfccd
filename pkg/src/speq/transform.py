"""Frequency-domain transform turning a series into near-Gaussian regression data.

Pipeline for a series of length n with T bins of mass m = floor(n / T):

1. squared orthonormal DCT-I coefficients W_j, j = 1..n;
2. bin sums Q_t over m consecutive coefficients (trailing n - T*m dropped);
3. variance-stabilized values Y_t = log(Q_t / m) / sqrt(2);
4. mirror to the periodic sequence (Y_T, ..., Y_2, Y_1, Y_2, ..., Y_{T-1})
   of length 2T - 2 and subtract the digamma centering term
   2^{-1/2} * (psi(m/2) - log(m/2)).

The result has mean approximately 2^{-1/2} log f at the design points
x_t = (t - 1) / (2T - 2) and variance approximately 1/m.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct
from scipy.special import digamma as _scipy_digamma

__all__ = [
    "DegenerateSeriesError",
    "dct1",
    "squared_coefficients",
    "coefficient_frequencies",
    "BinningPlan",
    "plan_bins",
    "bin_coefficients",
    "digamma",
    "TransformedSample",
    "transform",
    "transform_block",
]


class DegenerateSeriesError(ValueError):
    """Raised when a series is constant (all squared coefficients vanish)."""


def _as_series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    if x.size < 2:
        raise ValueError("series must have at least two observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def dct1(x) -> np.ndarray:
    """Orthonormal type-1 discrete cosine transform of a series."""
    return dct(_as_series(x), type=1, norm="ortho")


def squared_coefficients(x) -> np.ndarray:
    """Squared DCT-I coefficients W_j; W_j estimates f(pi * (j-1)/(n-1))."""
    return dct1(x) ** 2


def coefficient_frequencies(n: int) -> np.ndarray:
    """Frequency fractions (j - 1) / (n - 1) attached to W_1..W_n."""
    return np.arange(n) / (n - 1)


@dataclass(frozen=True)
class BinningPlan:
    """Shared bin count for two series plus the per-series bookkeeping."""

    T: int
    m1: int
    m2: int
    nu1: float
    nu2: float
    truncation: tuple[int, int]

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("need at least two bins")
        if min(self.m1, self.m2) < 1:
            raise ValueError("each series must fill every bin at least once")


def plan_bins(n1: int, n2: int, T: int | None = None) -> BinningPlan:
    """Choose the common bin count for two series of lengths n1 and n2.

    Defaults to floor(min(n1, n2)^0.8), lowered if necessary so that both
    series put at least two coefficients in every bin.  An explicit ``T``
    only requires mass >= 1.  Warns when log(n1)/log(n2) leaves [2/3, 3/2],
    where the shared-bin construction loses its accuracy guarantees.
    """
    if min(n1, n2) < 4:
        raise ValueError("series too short to bin")
    if T is None:
        T = int(min(n1, n2) ** 0.8)
        while T > 2 and min(n1 // T, n2 // T) < 2:
            T -= 1
    if T < 2:
        raise ValueError("need at least two bins")
    m1, m2 = n1 // T, n2 // T
    if min(m1, m2) < 1:
        raise ValueError(f"T={T} exceeds a series length (n1={n1}, n2={n2})")
    ratio = np.log(n1) / np.log(n2)
    if not (2.0 / 3.0 <= ratio <= 1.5):
        warnings.warn(
            f"length imbalance log(n1)/log(n2) = {ratio:.3f} outside [2/3, 3/2]; "
            "the binned samples may not be comparable",
            stacklevel=2,
        )
    return BinningPlan(
        T=T,
        m1=m1,
        m2=m2,
        nu1=np.log(T) / np.log(n1),
        nu2=np.log(T) / np.log(n2),
        truncation=(n1 - T * m1, n2 - T * m2),
    )


def bin_coefficients(W, plan: BinningPlan) -> np.ndarray:
    """Sums of m = floor(len(W)/T) consecutive entries; trailing entries dropped."""
    W = np.asarray(W, dtype=float)
    T = plan.T
    m = W.size // T
    if m < 1:
        raise ValueError(f"{W.size} coefficients cannot fill {T} bins")
    return W[: T * m].reshape(T, m).sum(axis=1)


def digamma(x):
    """Digamma function for positive arguments."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("digamma requires x > 0")
    out = _scipy_digamma(x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class TransformedSample:
    """Mirrored, variance-stabilized bin statistics of one series."""

    ystar: np.ndarray
    T: int
    m: int

    def __post_init__(self):
        if self.ystar.shape != (2 * self.T - 2,):
            raise ValueError("ystar must have length 2T - 2")
        if not np.all(np.isfinite(self.ystar)):
            raise ValueError("transformed values must be finite")

    @property
    def ntilde(self) -> int:
        return 2 * self.T - 2

    @property
    def n_used(self) -> int:
        return self.T * self.m

    @property
    def design_points(self) -> np.ndarray:
        """Equispaced periodic design x_t = (t - 1) / (2T - 2) on [0, 1)."""
        return np.arange(self.ntilde) / self.ntilde


def _stabilize(Q: np.ndarray, m: int) -> np.ndarray:
    """Rows of binned sums -> mirrored, centered ystar rows."""
    if np.any(Q <= 0):
        raise DegenerateSeriesError(
            "nonpositive bin sum; the input series is constant or degenerate"
        )
    Y = np.log(Q / m) / np.sqrt(2.0)
    T = Q.shape[-1]
    mirrored = np.concatenate([Y[..., ::-1], Y[..., 1 : T - 1]], axis=-1)
    shift = (_scipy_digamma(m / 2.0) - np.log(m / 2.0)) / np.sqrt(2.0)
    return mirrored - shift


def transform(x, plan: BinningPlan) -> TransformedSample:
    """Full transform of one series under a binning plan."""
    x = _as_series(x)
    T = plan.T
    m = x.size // T
    if m < 1:
        raise ValueError(f"series of length {x.size} cannot fill {T} bins")
    W = squared_coefficients(x)
    Q = W[: T * m].reshape(T, m).sum(axis=1)
    return TransformedSample(ystar=_stabilize(Q, m), T=T, m=m)


def transform_block(X: np.ndarray, T: int) -> np.ndarray:
    """Vectorized transform of row-stacked series; returns ystar rows."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("expected a block of series as rows")
    n = X.shape[1]
    m = n // T
    if m < 1:
        raise ValueError(f"series of length {n} cannot fill {T} bins")
    W = dct(X, type=1, norm="ortho", axis=1) ** 2
    Q = W[:, : T * m].reshape(X.shape[0], T, m).sum(axis=2)
    return _stabilize(Q, m)
