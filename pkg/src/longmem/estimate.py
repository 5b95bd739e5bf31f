"""Estimators for long-memory linear processes.

* QMLE: gamma_hat minimizes the truncated one-step prediction error sum
  S_n(gamma) = sum_t (X_t - mhat_t(gamma))^2 with
  mhat_t(gamma) = sum_{i=1}^{t-1} u_i(gamma) X_{t-i}, and
  sigma2_hat = S_n(gamma_hat) / n.  This is exactly the Gaussian
  quasi-maximum likelihood estimator with sigma2 profiled out.
* Whittle: frequency-domain contrast on the mean-removed periodogram,
  sigma2 profiled out analytically.
* BLUE location estimator with Toeplitz weights, plus the asymptotic
  covariance of the QMLE (matrix M and the sigma2 block) and helper scales.

Scalar gamma is optimized by bounded golden-section/parabolic bracketing,
two-dimensional gamma by Nelder-Mead restarted from a deterministic grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.optimize import minimize, minimize_scalar
from scipy.signal import fftconvolve

from .models import (
    Family,
    ModelSpec,
    _ar_coeffs_gamma,
    _dar_coeffs_gamma,
    autocovariance,
    dar_coeffs,
    default_gamma_bounds,
)
from .simulate import Series
from .specfun import beta_fn

__all__ = [
    "FitResult",
    "AsymptoticInfo",
    "IdentifiabilityError",
    "ToeplitzError",
    "truncated_predictor",
    "predictors",
    "qmle_objective",
    "qmle_gradient",
    "quasi_loglik",
    "fit_qmle",
    "periodogram",
    "fourier_frequencies",
    "spectral_density",
    "fit_whittle",
    "asymptotic_covariance",
    "blue_weights",
    "blue_mean",
    "blue_efficiency",
    "mean_clt_scale",
]

# margin keeping optimizer iterates strictly inside the compact domain
_BOUND_MARGIN = 1e-3
_XATOL_1D = 1e-6
_TOL_2D = 1e-7
_PINNED_TOL = 2e-6
_WHITTLE_LM_K = 100_000


class IdentifiabilityError(RuntimeError):
    """The truncated information matrix is not positive definite."""


class ToeplitzError(RuntimeError):
    """The Toeplitz solve for the BLUE weights broke down."""


@dataclass
class FitResult:
    estimator: str
    family: Family
    gamma_hat: tuple[float, ...]
    sigma2_hat: float
    objective: float
    iterations: int
    converged: bool
    boundary_pinned: bool = False
    stderr: tuple[float, ...] | None = None  # gamma coordinates, then sigma2

    def as_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "family": Family(self.family).value,
            "gamma_hat": list(self.gamma_hat),
            "sigma2_hat": self.sigma2_hat,
            "stderr": list(self.stderr) if self.stderr is not None else None,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "boundary_pinned": self.boundary_pinned,
        }


@dataclass
class AsymptoticInfo:
    M: np.ndarray  # (p-1, p-1) truncated information matrix for gamma
    var_sigma2: float  # sigma^4 (mu4 - 1)
    K_used: int
    mu4: float


# ---------------------------------------------------------------------------
# QMLE
# ---------------------------------------------------------------------------


def predictors(values: np.ndarray, family: Family, gamma: tuple[float, ...]) -> np.ndarray:
    """All truncated one-step predictors mhat_1..mhat_n (mhat_1 = 0)."""
    n = values.size
    u = _ar_coeffs_gamma(Family(family), tuple(gamma), n - 1) if n > 1 else np.empty(0)
    kernel = np.concatenate([[0.0], u])
    return fftconvolve(values, kernel)[:n]


def truncated_predictor(series: Series, family: Family, gamma, t: int) -> float:
    """mhat_t(gamma) = sum_{i=1}^{t-1} u_i(gamma) X_{t-i}, with mhat_1 = 0.

    t is 1-indexed, 1 <= t <= n.
    """
    values = series.values
    if not 1 <= t <= values.size:
        raise IndexError(f"t must lie in [1, {values.size}], got {t}")
    if t == 1:
        return 0.0
    u = _ar_coeffs_gamma(Family(family), tuple(gamma), t - 1)
    return float(np.dot(u, values[t - 2 :: -1]))


def qmle_objective(series: Series, family: Family, gamma) -> float:
    """Prediction error sum S_n(gamma) = sum_t (X_t - mhat_t(gamma))^2."""
    resid = series.values - predictors(series.values, family, tuple(gamma))
    return float(np.dot(resid, resid))


def qmle_gradient(series: Series, family: Family, gamma) -> np.ndarray:
    """Analytic gradient of S_n: -2 sum_t dmhat_t (X_t - mhat_t)."""
    values = series.values
    n = values.size
    gamma = tuple(gamma)
    resid = values - predictors(values, family, gamma)
    du = _dar_coeffs_gamma(Family(family), gamma, n - 1)
    grad = np.empty(du.shape[0])
    for j in range(du.shape[0]):
        kernel = np.concatenate([[0.0], du[j]])
        dm = fftconvolve(values, kernel)[:n]
        grad[j] = -2.0 * np.dot(dm, resid)
    return grad


def quasi_loglik(series: Series, family: Family, gamma, sigma2: float) -> float:
    """Gaussian quasi conditional log-likelihood of (gamma, sigma2)."""
    n = series.n
    s = qmle_objective(series, family, gamma)
    return -0.5 * (n * math.log(sigma2) + s / sigma2)


def _fit_bounds(
    family: Family, bounds: tuple[tuple[float, float], ...] | None
) -> tuple[tuple[float, float], ...]:
    if bounds is None:
        bounds = default_gamma_bounds(family)
    return tuple((lo + _BOUND_MARGIN, hi - _BOUND_MARGIN) for lo, hi in bounds)


def _pinned(gamma: tuple[float, ...], bounds) -> bool:
    return any(
        g - lo < _PINNED_TOL or hi - g < _PINNED_TOL for g, (lo, hi) in zip(gamma, bounds)
    )


def _minimize_gamma(objective, family: Family, bounds) -> tuple[tuple[float, ...], float, int, bool]:
    """Shared optimizer policy for both contrasts."""
    if len(bounds) == 1:
        (lo, hi) = bounds[0]
        res = minimize_scalar(
            lambda g: objective((g,)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": _XATOL_1D},
        )
        return (float(res.x),), float(res.fun), int(res.nfev), bool(res.success)

    # 2-D: deterministic restart grid, pre-screened to the 5 best corners
    (d_lo, d_hi), (a_lo, a_hi) = bounds
    seeds = [
        (min(max(d, d_lo), d_hi), min(max(a, a_lo), a_hi))
        for d in (0.1, 0.25, 0.4)
        for a in (-0.5, 0.0, 0.5, 0.9)
    ]
    seeds = sorted(set(seeds), key=lambda g: objective(g))[:5]
    best = None
    nfev = 12
    ok = False
    for g0 in seeds:
        res = minimize(
            lambda g: objective(tuple(g)),
            x0=np.asarray(g0),
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": _TOL_2D, "fatol": _TOL_2D, "maxiter": 2000},
        )
        nfev += int(res.nfev)
        ok = ok or bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    gamma = tuple(float(v) for v in best.x)
    return gamma, float(best.fun), nfev, ok


def fit_qmle(
    series: Series,
    family: Family,
    bounds: tuple[tuple[float, float], ...] | None = None,
    with_stderr: bool = False,
    mu4: float = 3.0,
) -> FitResult:
    """Quasi-maximum likelihood fit of (gamma, sigma2).

    gamma_hat minimizes qmle_objective over the (slightly shrunk) bounds and
    sigma2_hat = S_n(gamma_hat)/n.  Standard errors, when requested, come from
    the asymptotic covariance: sqrt(diag(M^-1)/n) for gamma and
    sqrt(sigma2_hat^2 (mu4-1)/n) for sigma2.
    """
    family = Family(family)
    n = series.n
    if n < 2:
        raise ValueError(f"need n >= 2 observations, got {n}")
    if n < 30:
        warnings.warn(f"n={n} is small; QMLE asymptotics are unreliable", stacklevel=2)
    opt_bounds = _fit_bounds(family, bounds)
    objective = lambda g: qmle_objective(series, family, g)
    gamma_hat, s_min, nfev, ok = _minimize_gamma(objective, family, opt_bounds)
    sigma2_hat = s_min / n
    result = FitResult(
        estimator="qmle",
        family=family,
        gamma_hat=gamma_hat,
        sigma2_hat=sigma2_hat,
        objective=s_min,
        iterations=nfev,
        converged=ok,
        boundary_pinned=_pinned(gamma_hat, opt_bounds),
    )
    if with_stderr:
        result.stderr = _stderr(family, gamma_hat, sigma2_hat, n, mu4)
    return result


def _stderr(family, gamma_hat, sigma2_hat, n, mu4) -> tuple[float, ...] | None:
    try:
        spec = ModelSpec(family=family, gamma=gamma_hat, sigma2=sigma2_hat)
        info = asymptotic_covariance(spec, mu4=mu4)
    except (ValueError, IdentifiabilityError):
        return None
    gamma_var = np.diag(np.linalg.inv(info.M))
    se = [math.sqrt(v / n) for v in gamma_var]
    se.append(math.sqrt(info.var_sigma2 / n))
    return tuple(se)


# ---------------------------------------------------------------------------
# Whittle
# ---------------------------------------------------------------------------


def fourier_frequencies(n: int) -> np.ndarray:
    """lambda_j = 2 pi j / n for j = 1..floor((n-1)/2)."""
    m = (n - 1) // 2
    return 2.0 * math.pi * np.arange(1, m + 1) / n


def periodogram(series: Series) -> np.ndarray:
    """I(lambda_j) = |sum_t X_t e^(-i t lambda_j)|^2 / (2 pi n) at the Fourier
    frequencies lambda_j, j = 1..floor((n-1)/2), after removing the sample mean."""
    values = series.values
    n = values.size
    if n < 4:
        raise ValueError(f"periodogram needs n >= 4, got {n}")
    centered = values - values.mean()
    dft = np.fft.rfft(centered)
    m = (n - 1) // 2
    return np.abs(dft[1 : m + 1]) ** 2 / (2.0 * math.pi * n)


def _lm_transfer(gamma, lam, K=_WHITTLE_LM_K):
    """1 - sum_{k<=K} u_k e^(-i k lambda), with a first-order tail correction."""
    u = _ar_coeffs_gamma(Family.LM, tuple(gamma), K)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    z = np.exp(-1j * lam)
    acc = np.zeros(lam.shape, dtype=complex)
    k = np.arange(1, K + 1)
    chunk = max(1, 10**7 // max(lam.size, 1))
    for lo in range(0, K, chunk):
        kk = k[lo : lo + chunk]
        acc += np.exp(-1j * np.outer(lam, kk)) @ u[lo : lo + chunk]
    tail = u[-1] * z ** (K + 1) / (1.0 - z)
    return 1.0 - acc - tail


def _lm_transfer_fourier(gamma, n, K=_WHITTLE_LM_K):
    """Same quantity at all Fourier frequencies at once, via index folding."""
    u = _ar_coeffs_gamma(Family.LM, tuple(gamma), K)
    folded = np.zeros(n)
    np.add.at(folded, np.arange(1, K + 1) % n, u)
    m = (n - 1) // 2
    dft = np.fft.rfft(folded)[1 : m + 1]
    lam = fourier_frequencies(n)
    z = np.exp(-1j * lam)
    tail = u[-1] * z ** (K + 1) / (1.0 - z)
    return 1.0 - dft - tail


def _spectral_shape(family: Family, gamma, lam) -> np.ndarray:
    """h with f = sigma2 h / (2 pi)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    d = gamma[0]
    if family is Family.LM:
        return np.abs(_lm_transfer(gamma, lam)) ** -2
    h = (2.0 * np.sin(lam / 2.0)) ** (-2.0 * d)
    if family is Family.FARIMA10:
        h = h * np.abs(1.0 - gamma[1] * np.exp(1j * lam)) ** -2
    return h


def spectral_density(spec: ModelSpec, lam):
    """Spectral density f(lambda) for lambda in (0, pi] (vectorized).

    FARIMA00: f = (sigma2/2pi) (2 sin(lambda/2))^(-2d); FARIMA10 adds the
    factor |1 - alpha e^(i lambda)|^(-2); LM uses the truncated transfer
    function of the autoregressive weights with an analytic tail correction.
    """
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(lam_arr == 0.0):
        raise ValueError("spectral density has a pole at lambda = 0")
    h = _spectral_shape(Family(spec.family), spec.gamma, lam_arr)
    f = spec.sigma2 * h / (2.0 * math.pi)
    return f if np.ndim(lam) else float(f[0])


def fit_whittle(
    series: Series,
    family: Family,
    bounds: tuple[tuple[float, float], ...] | None = None,
    with_stderr: bool = False,
    mu4: float = 3.0,
) -> FitResult:
    """Whittle fit: gamma_hat minimizes the profiled periodogram contrast
    m log(sigma2_hat(gamma)) + sum_j log h_gamma(lambda_j), where
    sigma2_hat(gamma) = (2 pi / m) sum_j I(lambda_j) / h_gamma(lambda_j)."""
    family = Family(family)
    n = series.n
    if n < 4:
        raise ValueError(f"need n >= 4 observations, got {n}")
    if n < 30:
        warnings.warn(f"n={n} is small; Whittle asymptotics are unreliable", stacklevel=2)
    pgram = periodogram(series)
    lam = fourier_frequencies(n)
    m = lam.size
    log_lam_shape = np.log(2.0 * np.sin(lam / 2.0))

    def shape(gamma) -> np.ndarray:
        if family is Family.LM:
            return np.abs(_lm_transfer_fourier(gamma, n)) ** -2
        h = np.exp(-2.0 * gamma[0] * log_lam_shape)
        if family is Family.FARIMA10:
            h = h * np.abs(1.0 - gamma[1] * np.exp(1j * lam)) ** -2
        return h

    def profiled(gamma) -> float:
        h = shape(gamma)
        s2 = (2.0 * math.pi / m) * float(np.sum(pgram / h))
        return m * math.log(s2) + float(np.sum(np.log(h)))

    opt_bounds = _fit_bounds(family, bounds)
    gamma_hat, _, nfev, ok = _minimize_gamma(profiled, family, opt_bounds)
    h_hat = shape(gamma_hat)
    sigma2_hat = (2.0 * math.pi / m) * float(np.sum(pgram / h_hat))
    f_hat = sigma2_hat * h_hat / (2.0 * math.pi)
    contrast = float(np.sum(np.log(f_hat) + pgram / f_hat))
    result = FitResult(
        estimator="whittle",
        family=family,
        gamma_hat=gamma_hat,
        sigma2_hat=sigma2_hat,
        objective=contrast,
        iterations=nfev,
        converged=ok,
        boundary_pinned=_pinned(gamma_hat, opt_bounds),
    )
    if with_stderr:
        result.stderr = _stderr(family, gamma_hat, sigma2_hat, n, mu4)
    return result


# ---------------------------------------------------------------------------
# Asymptotic covariance and location estimators
# ---------------------------------------------------------------------------


def asymptotic_covariance(spec: ModelSpec, K: int = 20_000, mu4: float = 3.0) -> AsymptoticInfo:
    """Truncated information matrix for gamma and the sigma2 variance block.

    M = sigma2^(-1) sum_{k,l <= K} du_k du_l^T r_X(l - k), evaluated by
    grouping the double sum over the lag l - k (FFT cross-correlations),
    and var_sigma2 = sigma2^2 (mu4 - 1).
    """
    if K < 1_000:
        raise ValueError(f"K must be >= 1000, got {K}")
    du = dar_coeffs(spec, K)
    r = autocovariance(spec, K - 1)
    p = du.shape[0]
    M = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            # corr[K-1+lag] = sum_k du_i[k] du_j[k+lag]
            corr = fftconvolve(du[j], du[i][::-1])
            s = corr[K - 1] * r[0] + np.dot(corr[K:] + corr[K - 2 :: -1], r[1:])
            M[i, j] = M[j, i] = s / spec.sigma2
    eigvals = np.linalg.eigvalsh(M)
    if eigvals.min() <= 0.0:
        raise IdentifiabilityError(
            f"information matrix is not positive definite (min eigenvalue {eigvals.min():.3e})"
        )
    return AsymptoticInfo(M=M, var_sigma2=spec.sigma2**2 * (mu4 - 1.0), K_used=K, mu4=mu4)


def blue_weights(autocov: np.ndarray) -> np.ndarray:
    """Weights of the best linear unbiased mean estimator for the Toeplitz
    covariance with first column ``autocov``; normalized to sum to 1."""
    ones = np.ones(autocov.size)
    try:
        w = solve_toeplitz(autocov, ones)
    except np.linalg.LinAlgError as exc:
        raise ToeplitzError(f"Toeplitz solve failed: {exc}") from exc
    total = w.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ToeplitzError(f"non-positive weight normalization {total!r}")
    return w / total


def blue_mean(series: Series, spec: ModelSpec) -> float:
    """Best linear unbiased estimate of the location parameter under ``spec``."""
    if series.n < 2:
        raise ValueError("blue_mean needs n >= 2")
    r = autocovariance(spec, series.n - 1)
    w = blue_weights(r)
    return float(np.dot(w, series.values))


def blue_efficiency(d: float) -> float:
    """Limit of Var(sample mean) / Var(BLUE): pi d (2d+1) / (B(1-d,1-d) sin(pi d))."""
    if not 0.0 < d < 0.5:
        raise ValueError(f"d must lie in (0, 1/2), got {d}")
    return math.pi * d * (2.0 * d + 1.0) / (beta_fn(1.0 - d, 1.0 - d) * math.sin(math.pi * d))


def mean_clt_scale(n: int, d: float) -> float:
    """Normalization n^(1/2 - d) of the mean estimators' convergence rate."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= d < 0.5:
        raise ValueError(f"d must lie in [0, 1/2), got {d}")
    return float(n) ** (0.5 - d)
