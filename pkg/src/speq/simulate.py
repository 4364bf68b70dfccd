"""Exact sampling of zero-mean stationary Gaussian series from a spectral model.

The default path embeds the length-n Toeplitz covariance into a circulant
matrix of power-of-two size >= 2(n-1) and colors complex white noise with the
square root of the circulant eigenvalues; this is exact in distribution when
the embedding is nonnegative definite.  If the embedding has an eigenvalue
below -1e-10 times the largest one, the sampler falls back to a dense
Cholesky factorization (with a tiny diagonal jitter retry).

Randomness comes from counter-based Philox streams keyed by
``(master_seed, stream_id)``, so any replicate can be generated independently
of the others and of thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.linalg import toeplitz

from .models import Autocovariance, SpectralModel, autocovariance

__all__ = [
    "SamplerState",
    "derive_seed",
    "covariance_matrix",
    "CirculantSampler",
    "sample_series",
]

_MASK64 = (1 << 64) - 1

_EMBED_TOL = 1e-10
_JITTER = 1e-12


@dataclass(frozen=True)
class SamplerState:
    """Identifies one reproducible random stream."""

    master_seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(master_seed: int, *key: int) -> int:
    """Derive a 64-bit child seed from a master seed and an integer key path."""
    ss = np.random.SeedSequence(entropy=master_seed & _MASK64, spawn_key=tuple(key))
    return int(ss.generate_state(2, dtype=np.uint64)[0])


def covariance_matrix(model: SpectralModel, n: int) -> np.ndarray:
    """Toeplitz covariance {gamma(|i-j|)} of n consecutive observations."""
    if n < 1:
        raise ValueError("n must be positive")
    gamma = autocovariance(model, n - 1)
    return toeplitz(gamma.values)


class CirculantSampler:
    """Reusable sampler for N(0, covariance_matrix(model, n)).

    Construction computes the autocovariance once; each ``sample`` call draws
    from the stream identified by its :class:`SamplerState`.
    """

    def __init__(self, model: SpectralModel, n: int, method: str = "auto"):
        if n < 2:
            raise ValueError("need n >= 2 to sample a series")
        if method not in ("auto", "embedding", "cholesky"):
            raise ValueError(f"unknown method {method!r}")
        self.model = model
        self.n = n
        self.embed_size = 1 << int(np.ceil(np.log2(max(2 * (n - 1), 2))))
        gamma = autocovariance(model, self.embed_size // 2)
        self.gamma = gamma
        self._chol: np.ndarray | None = None
        self._weights: np.ndarray | None = None
        if method != "cholesky":
            ev = self._embedding_eigenvalues(gamma)
            if method == "embedding" and ev.min() < -_EMBED_TOL * ev.max():
                raise ValueError(
                    "circulant embedding is not nonnegative definite for this model"
                )
            if ev.min() >= -_EMBED_TOL * ev.max():
                self._weights = np.sqrt(np.maximum(ev, 0.0) / self.embed_size)
        if self._weights is None:
            self._chol = self._cholesky_factor(gamma)
        self.method = "embedding" if self._weights is not None else "cholesky"

    def _embedding_eigenvalues(self, gamma: Autocovariance) -> np.ndarray:
        g = gamma.values
        row = np.concatenate([g, g[-2:0:-1]])
        return np.fft.fft(row).real

    def _cholesky_factor(self, gamma: Autocovariance) -> np.ndarray:
        cov = toeplitz(gamma.values[: self.n])
        try:
            return np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            jitter = _JITTER * gamma.values[0]
            try:
                return np.linalg.cholesky(cov + jitter * np.eye(self.n))
            except np.linalg.LinAlgError as exc:
                raise RuntimeError(
                    "covariance Cholesky factorization failed even with jitter"
                ) from exc

    def sample(self, state: SamplerState) -> np.ndarray:
        return self.sample_block([state])[0]

    def sample_block(self, states: Iterable[SamplerState]) -> np.ndarray:
        """One series per state, stacked as rows; each row depends only on its state."""
        states = list(states)
        r = len(states)
        if self._weights is not None:
            z = np.empty((r, self.embed_size), dtype=complex)
            for i, state in enumerate(states):
                draws = state.generator().standard_normal((2, self.embed_size))
                z[i] = draws[0] + 1j * draws[1]
            return np.fft.fft(z * self._weights, axis=1).real[:, : self.n]
        out = np.empty((r, self.n))
        for i, state in enumerate(states):
            out[i] = self._chol @ state.generator().standard_normal(self.n)
        return out


def sample_series(
    model: SpectralModel, n: int, state: SamplerState, method: str = "auto"
) -> np.ndarray:
    """Draw one exact N(0, covariance_matrix(model, n)) series."""
    return CirculantSampler(model, n, method=method).sample(state)
