"""Model catalogue and coefficient engines for long-memory causal linear processes.

Families
--------
FARIMA00   fractional noise, gamma = (d,)
FARIMA10   fractional noise with one AR root, gamma = (d, alpha)
LM         hyperbolic autoregression u_k = k^(-1-d) / zeta(1+d), gamma = (d,)

Every family is parameterized on the unit-noise scale: the moving-average
weights a_0, a_1, ... have a_0 = 1 and the innovation standard deviation
sigma enters only through simulation and the likelihood.  The autoregressive
weights u_1, u_2, ... satisfy sum(u_k) = 1 and never depend on sigma2.

All coefficient engines run in O(K) by multiplicative recursion (series
inversion is O(K^2)); results are cached per (family, gamma, K) and returned
read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve, lfilter

from .specfun import log_gamma, riemann_zeta

__all__ = [
    "Family",
    "ModelSpec",
    "CoeffTable",
    "ma_coeffs",
    "ar_coeffs",
    "dar_coeffs",
    "invert_series",
    "autocovariance",
    "coeff_table",
    "ar_polynomial",
    "default_gamma_bounds",
    "GAMMA_NAMES",
]


class Family(str, Enum):
    FARIMA00 = "farima00"
    FARIMA10 = "farima10"
    LM = "lm"


GAMMA_NAMES = {
    Family.FARIMA00: ("d",),
    Family.FARIMA10: ("d", "alpha"),
    Family.LM: ("d",),
}

_DEFAULT_D_BOUNDS = (0.01, 0.49)
_DEFAULT_ALPHA_BOUNDS = (-0.99, 0.99)
_DEFAULT_SIGMA2_BOUNDS = (1e-6, 1e6)


def default_gamma_bounds(family: Family) -> tuple[tuple[float, float], ...]:
    if Family(family) is Family.FARIMA10:
        return (_DEFAULT_D_BOUNDS, _DEFAULT_ALPHA_BOUNDS)
    return (_DEFAULT_D_BOUNDS,)


@dataclass(frozen=True)
class ModelSpec:
    """A parametric long-memory family with parameter vector (gamma, sigma2).

    gamma_bounds are the per-coordinate closed intervals of the compact
    estimation domain; the true gamma must lie inside them.
    """

    family: Family
    gamma: tuple[float, ...]
    sigma2: float = 1.0
    mu: float = 0.0
    gamma_bounds: tuple[tuple[float, float], ...] | None = None
    sigma2_bounds: tuple[float, float] = _DEFAULT_SIGMA2_BOUNDS

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        gamma = tuple(float(g) for g in np.atleast_1d(self.gamma))
        object.__setattr__(self, "gamma", gamma)
        if len(gamma) != len(GAMMA_NAMES[family]):
            raise ValueError(
                f"{family.value} expects gamma of length {len(GAMMA_NAMES[family])}, "
                f"got {len(gamma)}"
            )
        bounds = self.gamma_bounds
        if bounds is None:
            bounds = default_gamma_bounds(family)
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        object.__setattr__(self, "gamma_bounds", bounds)
        if len(bounds) != len(gamma):
            raise ValueError("gamma_bounds must match gamma length")

        d = gamma[0]
        if not 0.0 < d < 0.5:
            raise ValueError(f"memory parameter d must lie strictly in (0, 1/2), got {d}")
        if family is Family.FARIMA10:
            alpha = gamma[1]
            if not -1.0 < alpha < 1.0:
                raise ValueError(f"AR parameter alpha must lie strictly in (-1, 1), got {alpha}")
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        for g, (lo, hi) in zip(gamma, bounds):
            if not lo <= g <= hi:
                raise ValueError(f"gamma value {g} outside bounds [{lo}, {hi}]")

    @property
    def d(self) -> float:
        return self.gamma[0]

    @property
    def alpha(self) -> float:
        if Family(self.family) is not Family.FARIMA10:
            raise AttributeError(f"{self.family} has no AR parameter")
        return self.gamma[1]

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class CoeffTable:
    """Truncated MA(inf) weights a_0..a_K and AR(inf) weights u_1..u_K."""

    a: np.ndarray  # length K + 1
    u: np.ndarray  # length K, u[k-1] multiplies X_{t-k}
    K: int


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=512)
def _frac_diff_coeffs(d: float, K: int) -> np.ndarray:
    """Power-series coefficients of (1 - z)^d, indices 0..K."""
    pi = np.empty(K + 1)
    pi[0] = 1.0
    if K >= 1:
        i = np.arange(1.0, K + 1)
        pi[1:] = np.cumprod((i - 1.0 - d) / i)
    return _readonly(pi)


@lru_cache(maxsize=512)
def _frac_int_coeffs(d: float, K: int) -> np.ndarray:
    """Power-series coefficients of (1 - z)^(-d), indices 0..K."""
    psi = np.empty(K + 1)
    psi[0] = 1.0
    if K >= 1:
        i = np.arange(1.0, K + 1)
        psi[1:] = np.cumprod((i - 1.0 + d) / i)
    return _readonly(psi)


def _check_gamma(family: Family, gamma: tuple[float, ...]) -> None:
    # relaxed domain: estimation may evaluate candidates outside (0, 1/2);
    # fractional-differencing weights are valid on (-1/2, 1), the LM weights
    # need 1 + d > 1
    d = gamma[0]
    if family is Family.LM:
        if not 0.0 < d < 1.0:
            raise ValueError(f"LM coefficients require d in (0, 1), got {d}")
    elif not -0.5 < d < 1.0:
        raise ValueError(f"coefficient engines require d in (-1/2, 1), got {d}")
    if family is Family.FARIMA10 and not -1.0 < gamma[1] < 1.0:
        raise ValueError(f"alpha must lie in (-1, 1), got {gamma[1]}")


@lru_cache(maxsize=512)
def _ar_coeffs_gamma(family: Family, gamma: tuple[float, ...], K: int) -> np.ndarray:
    _check_gamma(family, gamma)
    d = gamma[0]
    if family is Family.LM:
        k = np.arange(1.0, K + 1)
        u = k ** (-1.0 - d) / riemann_zeta(1.0 + d)
    elif family is Family.FARIMA00:
        u = -_frac_diff_coeffs(d, K)[1:]
    else:  # FARIMA10: AR polynomial (1 - z)^d (1 - alpha z)
        alpha = gamma[1]
        pi = _frac_diff_coeffs(d, K)
        full = pi.copy()
        full[1:] -= alpha * pi[:-1]
        u = -full[1:]
    return _readonly(u)


@lru_cache(maxsize=512)
def _ma_coeffs_gamma(family: Family, gamma: tuple[float, ...], K: int) -> np.ndarray:
    _check_gamma(family, gamma)
    d = gamma[0]
    if family is Family.FARIMA00:
        a = _frac_int_coeffs(d, K).copy()
    elif family is Family.FARIMA10:
        psi = _frac_int_coeffs(d, K)
        a = lfilter([1.0], [1.0, -gamma[1]], psi)
    else:  # LM: invert the AR polynomial
        u = _ar_coeffs_gamma(family, gamma, K)
        c = np.empty(K + 1)
        c[0] = 1.0
        c[1:] = -u
        a = invert_series(c)
    return _readonly(a)


def ma_coeffs(spec: ModelSpec, K: int) -> np.ndarray:
    """MA(inf) weights a_0..a_K on the unit-noise scale (a_0 = 1)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return _ma_coeffs_gamma(Family(spec.family), spec.gamma, int(K))


def ar_coeffs(spec: ModelSpec, K: int) -> np.ndarray:
    """AR(inf) weights u_1..u_K; u[k-1] multiplies X_{t-k}."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return _ar_coeffs_gamma(Family(spec.family), spec.gamma, int(K))


_FD_STEP = 1e-5


@lru_cache(maxsize=256)
def _dar_coeffs_gamma(family: Family, gamma: tuple[float, ...], K: int) -> np.ndarray:
    _check_gamma(family, gamma)
    if family is Family.LM:
        d = gamma[0]
        z = riemann_zeta(1.0 + d)
        zp = riemann_zeta(1.0 + d, order=1)
        n = np.arange(1.0, K + 1)
        du = -(n ** (-1.0 - d)) / z**2 * (z * np.log(n) + zp)
        return _readonly(du[np.newaxis, :])
    # FARIMA families: central finite differences coordinate by coordinate
    out = np.empty((len(gamma), K))
    for j in range(len(gamma)):
        g_plus = list(gamma)
        g_minus = list(gamma)
        g_plus[j] += _FD_STEP
        g_minus[j] -= _FD_STEP
        up = _ar_coeffs_gamma(family, tuple(g_plus), K)
        um = _ar_coeffs_gamma(family, tuple(g_minus), K)
        out[j] = (up - um) / (2.0 * _FD_STEP)
    return _readonly(out)


def dar_coeffs(spec: ModelSpec, K: int) -> np.ndarray:
    """Derivatives of the AR weights in gamma, shape (len(gamma), K).

    LM uses the analytic form
    du_n/dd = -n^(-1-d) zeta(1+d)^(-2) (zeta(1+d) log n + zeta'(1+d));
    the FARIMA families use central finite differences with step 1e-5.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return _dar_coeffs_gamma(Family(spec.family), spec.gamma, int(K))


def invert_series(c) -> np.ndarray:
    """Multiplicative inverse of a power series, truncated at the same order.

    Returns b with (sum b_j z^j)(sum c_j z^j) = 1 + O(z^(K+1)).
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("invert_series expects a nonempty 1-D coefficient array")
    if c[0] == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    K = c.size - 1
    b = np.empty(K + 1)
    b[0] = 1.0 / c[0]
    for k in range(1, K + 1):
        b[k] = -np.dot(c[1 : k + 1], b[k - 1 :: -1]) / c[0]
    return b


def ar_polynomial(spec: ModelSpec, K: int) -> np.ndarray:
    """Coefficients of 1 - sum_k u_k z^k, indices 0..K."""
    u = ar_coeffs(spec, K)
    c = np.empty(K + 1)
    c[0] = 1.0
    c[1:] = -u
    return c


def coeff_table(spec: ModelSpec, K: int) -> CoeffTable:
    return CoeffTable(a=ma_coeffs(spec, K), u=ar_coeffs(spec, K), K=int(K))


def _asymptote_fit(a: np.ndarray, d: float) -> tuple[float, float]:
    """Fit a_i = (c + b/i) i^(d-1) over the last half of the table."""
    Ka = a.size - 1
    idx = np.unique(np.geomspace(max(Ka // 2, 2), Ka, 60).astype(int))
    y = a[idx] * idx ** (1.0 - d)
    design = np.vstack([np.ones(idx.size), 1.0 / idx]).T
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0]), float(coef[1])


def _tail_integral(c: float, b: float, d: float, L: float, k: int) -> float:
    # sum_{i >= L + 1/2} (c + b/i)(c + b/(i+k)) i^(d-1) (i+k)^(d-1),
    # midpoint rule, integrated on x = L/t to tame the hyperbolic decay
    def integrand(t):
        x = L / t
        return (c + b / x) * (c + b / (x + k)) * x ** (d - 1.0) * (x + k) ** (d - 1.0) * L / t**2

    val, _ = quad(integrand, 0.0, 1.0, epsabs=1e-14, epsrel=1e-11, limit=200)
    return val


def _tail_corrections(c: float, b: float, d: float, Ka: int, maxlag: int) -> np.ndarray:
    """Tail integral for every lag 0..maxlag.  The integral is a smooth
    function of the lag, so past 64 lags it is splined over ~60 nodes
    instead of quadrature at every lag."""
    if maxlag <= 64:
        ks = np.arange(maxlag + 1)
    else:
        ks = np.unique(
            np.concatenate(
                [np.arange(9), np.geomspace(9, maxlag, 56).astype(int), [maxlag]]
            )
        )
    vals = np.array([_tail_integral(c, b, d, Ka - k + 0.5, int(k)) for k in ks])
    if maxlag <= 64:
        return vals
    from scipy.interpolate import CubicSpline

    return CubicSpline(ks, vals)(np.arange(maxlag + 1))


def _autocov_by_convolution(
    family: Family, gamma: tuple[float, ...], maxlag: int, K: int | None = None
) -> np.ndarray:
    """r(k) = sum_i a_i a_{i+k} truncated at K, plus the analytic correction
    for the hyperbolic tail (unit-noise scale)."""
    d = gamma[0]
    Ka = max(K or 0, maxlag + 10_000)
    a = _ma_coeffs_gamma(family, gamma, Ka)
    full = fftconvolve(a, a[::-1])
    r = full[Ka : Ka + maxlag + 1].copy()
    c, b = _asymptote_fit(a, d)
    r += _tail_corrections(c, b, d, Ka, maxlag)
    return r


@lru_cache(maxsize=128)
def _autocov_gamma(
    family: Family, gamma: tuple[float, ...], maxlag: int, K: int | None
) -> np.ndarray:
    if family is Family.FARIMA00:
        # closed form r(k) = r(k-1) (k-1+d)/(k-d); validated against the
        # MA-convolution in the test suite, not assumed
        d = gamma[0]
        r = np.empty(maxlag + 1)
        r[0] = math.exp(log_gamma(1.0 - 2.0 * d) - 2.0 * log_gamma(1.0 - d))
        if maxlag >= 1:
            k = np.arange(1.0, maxlag + 1)
            r[1:] = r[0] * np.cumprod((k - 1.0 + d) / (k - d))
        return _readonly(r)
    return _readonly(_autocov_by_convolution(family, gamma, maxlag, K))


def autocovariance(spec: ModelSpec, maxlag: int, K: int | None = None) -> np.ndarray:
    """Autocovariances r_X(0..maxlag), including the sigma2 scale.

    FARIMA00 uses the stable closed-form recursion; other families use the
    MA-weight convolution truncated at K (default maxlag + 10000) with an
    analytic correction for the i^(d-1) tail, keeping the truncation error
    below 1e-8 of r(0).
    """
    if maxlag < 0:
        raise ValueError(f"maxlag must be >= 0, got {maxlag}")
    r = _autocov_gamma(Family(spec.family), spec.gamma, int(maxlag), K)
    return _readonly(spec.sigma2 * r)
