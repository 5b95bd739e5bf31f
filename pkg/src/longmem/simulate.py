"""Trajectory generation: exact Gaussian sampling via circulant embedding and
an approximate truncated moving-average generator, both deterministically seeded.

The RNG is numpy's Philox counter-based generator.  A campaign derives one
independent stream per replication through ``np.random.SeedSequence(base,
spawn_key=...)``, so serial and parallel runs draw identical numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .models import Family, ModelSpec, autocovariance, ma_coeffs

__all__ = [
    "Series",
    "GenConfig",
    "EmbeddingError",
    "simulate",
    "white_noise",
    "rng_from_seed",
    "derive_seed",
    "series_to_csv",
    "series_from_csv",
    "GENERATORS",
]

GENERATORS = ("exact-gaussian", "truncated-ma")

# relative threshold below which negative circulant eigenvalues are treated
# as roundoff and clamped to zero; anything lower aborts
_EV_TOL = 1e-8


class EmbeddingError(RuntimeError):
    """Circulant embedding produced materially negative eigenvalues."""

    def __init__(self, min_eigenvalue: float, size: int):
        self.min_eigenvalue = min_eigenvalue
        self.size = size
        super().__init__(
            f"circulant embedding of size {size} is not nonnegative definite "
            f"(min eigenvalue {min_eigenvalue:.3e})"
        )


@dataclass(frozen=True)
class Series:
    """An observed or simulated trajectory X_1..X_n."""

    values: np.ndarray
    meta: dict | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("Series requires a 1-D array with n >= 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("Series values must all be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class GenConfig:
    """Generator choice plus seed; K and burnin apply to truncated-ma only."""

    generator: str = "exact-gaussian"
    seed: int = 0
    K: int | None = None
    burnin: int = 0

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}, expected one of {GENERATORS}")
        if self.burnin < 0:
            raise ValueError("burnin must be >= 0")


def rng_from_seed(seed) -> np.random.Generator:
    """Philox generator from an integer seed or a SeedSequence."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(base_seed: int, *key: int) -> np.random.SeedSequence:
    """Stable per-task seed derivation: (base, key) -> independent stream."""
    return np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))


def white_noise(n: int, seed) -> np.ndarray:
    """i.i.d. standard normal draws, deterministic in the seed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng_from_seed(seed).standard_normal(n)


def _next_pow2(m: int) -> int:
    return 1 << max(int(math.ceil(math.log2(m))), 3)


@lru_cache(maxsize=64)
def _embedding(spec: ModelSpec, n: int) -> tuple[np.ndarray, int]:
    """Sqrt-eigenvalue weights of the covariance circulant, cached per (spec, n)."""
    M = _next_pow2(4 * n)
    r = autocovariance(spec, M // 2)
    ring = np.concatenate([r, r[-2:0:-1]])
    ev = np.fft.fft(ring).real
    ev_max = ev.max()
    ev_min = ev.min()
    if ev_min < -_EV_TOL * ev_max:
        raise EmbeddingError(float(ev_min), M)
    ev = np.clip(ev, 0.0, None)
    ev.flags.writeable = False
    return ev, M


def _sample_exact_gaussian(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    ev, M = _embedding(spec, n)
    half = M // 2
    g1 = rng.standard_normal(half + 1)
    g2 = rng.standard_normal(half + 1)
    w = np.empty(M, dtype=complex)
    w[0] = math.sqrt(ev[0] / M) * g1[0]
    w[half] = math.sqrt(ev[half] / M) * g1[half]
    mid = np.sqrt(ev[1:half] / (2.0 * M))
    w[1:half] = mid * (g1[1:half] + 1j * g2[1:half])
    w[half + 1 :] = np.conj(w[half - 1 : 0 : -1])
    z = np.fft.fft(w)
    return z[:n].real + spec.mu


def _sample_truncated_ma(spec: ModelSpec, n: int, cfg: GenConfig, rng: np.random.Generator) -> np.ndarray:
    K = cfg.K if cfg.K is not None else 10 * n
    if K < n:
        raise ValueError(f"truncated-ma requires K >= n, got K={K}, n={n}")
    a = ma_coeffs(spec, K)
    eps = rng.standard_normal(cfg.burnin + n + K)
    x = fftconvolve(eps, a, mode="valid")  # x[t] = sum_i a_i eps_{t-i}
    return spec.sigma * x[-n:] + spec.mu


def simulate(spec: ModelSpec, n: int, cfg: GenConfig) -> Series:
    """Simulate a trajectory of length n from the given model.

    exact-gaussian embeds the autocovariance ring in a circulant of size
    next_pow2(4n) and synthesizes a stationary Gaussian path with exactly the
    target covariance; truncated-ma filters white noise through the first K
    moving-average weights and discards the burn-in.  Identical
    (spec, n, cfg) always yields bit-identical output.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    rng = rng_from_seed(cfg.seed)
    if cfg.generator == "exact-gaussian":
        values = _sample_exact_gaussian(spec, n, rng)
    else:
        values = _sample_truncated_ma(spec, n, cfg, rng)
    meta = {
        "family": Family(spec.family).value,
        "gamma": list(spec.gamma),
        "sigma2": spec.sigma2,
        "mu": spec.mu,
        "generator": cfg.generator,
        "seed": cfg.seed,
        "n": n,
    }
    return Series(values=values, meta=meta)


def series_to_csv(series: Series, path) -> None:
    """One value per line with a single header row ``x``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x"])
        for v in series.values:
            writer.writerow([f"{v:.17g}"])


def series_from_csv(path) -> Series:
    """Read a series: one value per line (optional header), or two columns
    time,value where rows are sorted by time and the time column dropped."""
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.reader(fh):
            cells = [c.strip() for c in raw if c.strip() != ""]
            if cells:
                rows.append(cells)
    if not rows:
        raise ValueError(f"no data found in {path}")
    start = 0
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        start = 1  # header row
    if not rows[start:]:
        raise ValueError(f"no numeric rows found in {path}")
    width = len(rows[start])
    if any(len(r) != width for r in rows[start:]):
        raise ValueError(f"inconsistent column count in {path}")
    if width == 1:
        values = np.array([float(r[0]) for r in rows[start:]])
    elif width == 2:
        pairs = sorted((float(t), float(v)) for t, v in rows[start:])
        values = np.array([v for _, v in pairs])
    else:
        raise ValueError(f"expected 1 or 2 columns, got {width}")
    return Series(values=values, meta={"source": str(Path(path))})
