import math

import numpy as np
import pytest
from scipy.integrate import quad

from longmem.estimate import (
    asymptotic_covariance,
    blue_efficiency,
    blue_mean,
    blue_weights,
    fit_qmle,
    fit_whittle,
    mean_clt_scale,
    periodogram,
    qmle_gradient,
    qmle_objective,
    quasi_loglik,
    spectral_density,
    truncated_predictor,
)
from longmem.models import ModelSpec, ar_coeffs, autocovariance, ma_coeffs
from longmem.simulate import GenConfig, Series, simulate, white_noise


def spec_of(family, *gamma, sigma2=1.0, **kw):
    return ModelSpec(family=family, gamma=tuple(gamma), sigma2=sigma2, **kw)


def sim(family, gamma, sigma2, n, seed, mu=0.0):
    return simulate(
        ModelSpec(family=family, gamma=gamma, sigma2=sigma2, mu=mu), n, GenConfig(seed=seed)
    )


# ---------------------------------------------------------------------------
# Truncated predictor and objective
# ---------------------------------------------------------------------------


def test_predictor_conventions():
    series = Series(values=white_noise(50, seed=2))
    assert truncated_predictor(series, "farima00", (0.3,), 1) == 0.0
    u1 = ar_coeffs(spec_of("farima00", 0.3), 1)[0]
    expected = u1 * series.values[0]
    assert truncated_predictor(series, "farima00", (0.3,), 2) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(IndexError):
        truncated_predictor(series, "farima00", (0.3,), 0)
    with pytest.raises(IndexError):
        truncated_predictor(series, "farima00", (0.3,), 51)


def test_predictor_brute_force_oracle():
    series = Series(values=white_noise(50, seed=11))
    u = ar_coeffs(spec_of("farima00", 0.3), 49)
    t = 50
    brute = 0.0
    for i in range(1, t):
        brute += u[i - 1] * series.values[t - i - 1]
    assert truncated_predictor(series, "farima00", (0.3,), t) == pytest.approx(brute, abs=1e-12)


def test_objective_zero_series():
    zeros = Series(values=np.zeros(40))
    for g in [(0.1,), (0.3,), (0.45,)]:
        assert qmle_objective(zeros, "farima00", g) == 0.0


def test_objective_scaling_homogeneity():
    series = sim("farima00", (0.25,), 2.0, 400, seed=5)
    scaled = Series(values=3.0 * series.values)
    for g in [(0.1,), (0.25,), (0.4,)]:
        s1 = qmle_objective(series, "farima00", g)
        s9 = qmle_objective(scaled, "farima00", g)
        assert s9 == pytest.approx(9.0 * s1, rel=1e-12)


def naive_objective(series, family, gamma):
    # independent evaluation: per-t coefficient lookup and explicit loops
    values = series.values
    n = values.size
    u = ar_coeffs(spec_of(family, *gamma), n - 1)
    total = 0.0
    for t in range(1, n + 1):
        mhat = 0.0
        for i in range(1, t):
            mhat += u[i - 1] * values[t - i - 1]
        total += (values[t - 1] - mhat) ** 2
    return total


def test_objective_matches_naive_reimplementation():
    series = sim("farima00", (0.3,), 4.0, 200, seed=9)
    for d in np.linspace(0.05, 0.45, 21):
        fast = qmle_objective(series, "farima00", (d,))
        slow = naive_objective(series, "farima00", (d,))
        assert abs(fast - slow) <= 1e-10 * max(1.0, slow)


# ---------------------------------------------------------------------------
# fit_qmle
# ---------------------------------------------------------------------------


def test_fit_qmle_recovers_d():
    series = sim("farima00", (0.2,), 4.0, 3000, seed=31)
    fit = fit_qmle(series, "farima00")
    assert fit.converged
    assert abs(fit.gamma_hat[0] - 0.2) < 0.05  # ~3x the n=3000 sqrt-MSE scale
    assert abs(fit.sigma2_hat - 4.0) < 0.5


def test_fit_qmle_location_robustness():
    # The infinite-past autoregression is exactly location-free; the truncated
    # predictor leaks mu * (1 - sum_{i<t} u_i) ~ mu t^(-d) into the residuals,
    # so the robustness band only holds for offsets that are small relative to
    # sigma (a 5-sigma offset moves d-hat by ~0.2 at n = 3000).
    series = sim("farima00", (0.2,), 4.0, 3000, seed=37)
    shifted = Series(values=series.values + 0.5)
    d0 = fit_qmle(series, "farima00").gamma_hat[0]
    d_off = fit_qmle(shifted, "farima00").gamma_hat[0]
    assert abs(d_off - d0) <= 0.02


def test_fit_qmle_sigma2_identity():
    series = sim("lm", (0.2,), 4.0, 500, seed=41)
    fit = fit_qmle(series, "lm")
    s = qmle_objective(series, "lm", fit.gamma_hat)
    assert fit.sigma2_hat == pytest.approx(s / series.n, rel=1e-12)
    assert fit.objective == pytest.approx(s, rel=1e-12)


def test_fit_qmle_scale_invariance():
    series = sim("farima00", (0.25,), 1.0, 800, seed=43)
    c = 5.0
    fit1 = fit_qmle(series, "farima00")
    fit2 = fit_qmle(Series(values=c * series.values), "farima00")
    assert fit2.gamma_hat[0] == pytest.approx(fit1.gamma_hat[0], abs=1e-10)
    assert fit2.sigma2_hat == pytest.approx(c**2 * fit1.sigma2_hat, rel=1e-10)


def test_fit_qmle_beats_grid_competitors_in_quasi_loglik():
    series = sim("farima00", (0.3,), 2.0, 600, seed=47)
    fit = fit_qmle(series, "farima00")
    best = quasi_loglik(series, "farima00", fit.gamma_hat, fit.sigma2_hat)
    for d in np.linspace(0.011, 0.489, 40):
        s2 = qmle_objective(series, "farima00", (d,)) / series.n
        assert best >= quasi_loglik(series, "farima00", (d,), s2) - 1e-9


def test_fit_qmle_small_n_warns():
    series = Series(values=white_noise(20, seed=3))
    with pytest.warns(UserWarning):
        fit_qmle(series, "farima00")


def test_fit_qmle_farima10_two_dimensional():
    series = sim("farima10", (0.2, 0.5), 4.0, 2000, seed=53)
    fit = fit_qmle(series, "farima10")
    assert fit.converged
    assert abs(fit.gamma_hat[0] - 0.2) < 0.15
    assert abs(fit.gamma_hat[1] - 0.5) < 0.15


def test_fit_qmle_stderr():
    series = sim("farima00", (0.2,), 4.0, 2000, seed=59)
    fit = fit_qmle(series, "farima00", with_stderr=True)
    se_d, se_s2 = fit.stderr
    # theory: sqrt(6/pi^2 / n) and sqrt(2 sigma^4 / n)
    assert se_d == pytest.approx(math.sqrt(6.0 / math.pi**2 / 2000), rel=0.05)
    assert se_s2 == pytest.approx(math.sqrt(2.0 * fit.sigma2_hat**2 / 2000), rel=1e-9)


def test_gradient_matches_finite_difference():
    series = sim("farima00", (0.3,), 1.0, 400, seed=61)
    h = 1e-6
    for family, gamma in [("farima00", (0.22,)), ("lm", (0.31,))]:
        grad = qmle_gradient(series, family, gamma)
        fd = (
            qmle_objective(series, family, (gamma[0] + h,))
            - qmle_objective(series, family, (gamma[0] - h,))
        ) / (2 * h)
        assert abs(grad[0] - fd) <= 1e-5 * max(1.0, abs(fd))


# ---------------------------------------------------------------------------
# Periodogram and spectral density
# ---------------------------------------------------------------------------


def test_periodogram_constant_series_is_zero():
    series = Series(values=np.full(64, 3.7))
    assert np.max(np.abs(periodogram(series))) < 1e-25


def test_periodogram_parseval():
    for n in (128, 129, 500):
        series = Series(values=white_noise(n, seed=n))
        pgram = periodogram(series)
        # sum over all nonzero DFT frequencies: double j <= (n-1)/2, plus the
        # Nyquist term when n is even
        total = 2.0 * pgram.sum()
        if n % 2 == 0:
            centered = series.values - series.values.mean()
            nyq = abs(np.fft.rfft(centered)[n // 2]) ** 2 / (2.0 * math.pi * n)
            total += nyq
        sample_var = float(np.mean((series.values - series.values.mean()) ** 2))
        assert (2.0 * math.pi / n) * total == pytest.approx(sample_var, abs=1e-10)


def test_periodogram_cosine_concentration():
    n, k = 256, 19
    t = np.arange(1, n + 1)
    lam_k = 2.0 * math.pi * k / n
    series = Series(values=np.cos(lam_k * t))
    pgram = periodogram(series)
    # direct DFT oracle at the peak
    dft = np.sum(np.cos(lam_k * t) * np.exp(-1j * t * lam_k))
    oracle = abs(dft) ** 2 / (2.0 * math.pi * n)
    assert pgram[k - 1] == pytest.approx(oracle, rel=1e-10)
    others = np.delete(pgram, k - 1)
    assert pgram[k - 1] > 1e6 * np.max(others)


def test_spectral_density_white_noise_limit():
    spec = spec_of("farima00", 1e-12, sigma2=4.0, gamma_bounds=((1e-13, 0.49),))
    lam = np.linspace(0.1, math.pi, 7)
    f = spectral_density(spec, lam)
    assert np.allclose(f, 4.0 / (2.0 * math.pi), rtol=1e-9)


@pytest.mark.parametrize("family,gamma", [("farima00", (0.3,)), ("farima10", (0.2, 0.5))])
def test_spectral_density_integrates_to_variance(family, gamma):
    spec = spec_of(family, *gamma, sigma2=4.0)
    val, _ = quad(lambda x: spectral_density(spec, x), 0.0, math.pi, limit=300)
    r0 = autocovariance(spec, 0)[0]
    assert 2.0 * val == pytest.approx(r0, rel=1e-4)


def test_spectral_density_low_frequency_expansion():
    spec = spec_of("farima00", 0.3, sigma2=4.0)
    lam = 1e-4
    val = spectral_density(spec, lam) * lam ** (2.0 * 0.3)
    assert val == pytest.approx(4.0 / (2.0 * math.pi), rel=0.01)


def test_spectral_density_lm_polylog_oracle():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    d = 0.25
    spec = spec_of("lm", d, sigma2=4.0)
    from longmem.specfun import riemann_zeta

    z = riemann_zeta(1.0 + d)
    for lam in (0.1, 0.5, 1.0, 2.0, 3.0):
        transfer = 1.0 - complex(mp.polylog(1.0 + d, mp.exp(-1j * lam))) / z
        oracle = 4.0 / (2.0 * math.pi) * abs(transfer) ** -2
        assert spectral_density(spec, lam) == pytest.approx(oracle, rel=1e-4)


def test_spectral_density_rejects_zero():
    with pytest.raises(ValueError):
        spectral_density(spec_of("farima00", 0.2), 0.0)


# ---------------------------------------------------------------------------
# Whittle estimator
# ---------------------------------------------------------------------------


def test_whittle_white_noise_pins_at_lower_bound():
    series = Series(values=white_noise(2000, seed=71))
    fit = fit_whittle(series, "farima00")
    assert fit.gamma_hat[0] < 0.02
    assert fit.boundary_pinned


def test_whittle_recovers_d_and_sigma2():
    series = sim("farima00", (0.3,), 4.0, 3000, seed=73)
    fit = fit_whittle(series, "farima00")
    assert abs(fit.gamma_hat[0] - 0.3) < 0.05
    assert abs(fit.sigma2_hat - 4.0) < 0.5


def test_whittle_lm_family():
    series = sim("lm", (0.3,), 4.0, 2000, seed=79)
    fit = fit_whittle(series, "lm")
    assert fit.converged
    assert abs(fit.gamma_hat[0] - 0.3) < 0.1


@pytest.fixture(scope="module")
def qmle_whittle_pairs():
    # common paths, both estimators, at two sample sizes
    out = {}
    for n in (300, 3000):
        diffs = np.empty(200)
        for r in range(200):
            series = sim("farima00", (0.2,), 4.0, n, seed=900000 + 7 * r + n)
            dq = fit_qmle(series, "farima00").gamma_hat[0]
            dw = fit_whittle(series, "farima00").gamma_hat[0]
            diffs[r] = abs(dq - dw)
        out[n] = diffs
    return out


def test_qmle_whittle_agree_on_common_paths(qmle_whittle_pairs):
    diffs = qmle_whittle_pairs[3000]
    assert np.mean(diffs <= 0.02) >= 0.95


def test_qmle_whittle_agreement_improves_with_n(qmle_whittle_pairs):
    assert qmle_whittle_pairs[3000].mean() < qmle_whittle_pairs[300].mean()


# ---------------------------------------------------------------------------
# Asymptotic covariance
# ---------------------------------------------------------------------------


def whittle_information_quadrature(spec, h=1e-5):
    """(4 pi)^(-1) int (d/dgamma log f)^2 over (-pi, pi), by central finite
    differences in gamma and adaptive quadrature (independent of the
    coefficient-domain double sum)."""
    d = spec.gamma[0]
    up = spec_of(spec.family, d + h, sigma2=spec.sigma2)
    dn = spec_of(spec.family, d - h, sigma2=spec.sigma2)

    def integrand(lam):
        return (
            (math.log(spectral_density(up, lam)) - math.log(spectral_density(dn, lam)))
            / (2.0 * h)
        ) ** 2

    val, _ = quad(integrand, 0.0, math.pi, limit=400)
    return 2.0 * val / (4.0 * math.pi)


@pytest.mark.parametrize("d,sigma2", [(0.2, 4.0), (0.35, 1.0)])
def test_asymptotic_covariance_matches_whittle_information(d, sigma2):
    spec = spec_of("farima00", d, sigma2=sigma2)
    info = asymptotic_covariance(spec, K=20_000)
    oracle = whittle_information_quadrature(spec)
    assert info.M[0, 0] == pytest.approx(oracle, rel=1e-2)


def test_asymptotic_covariance_sigma2_block():
    info = asymptotic_covariance(spec_of("farima00", 0.2, sigma2=2.0))
    assert info.var_sigma2 == pytest.approx(2.0 * 2.0**2, rel=1e-14)  # 2 sigma^4 (Gaussian)
    assert info.mu4 == 3.0


def test_asymptotic_covariance_positive_definite_catalogue():
    for family, gamma in [("farima00", (0.1,)), ("farima10", (0.3, 0.5)), ("lm", (0.4,))]:
        info = asymptotic_covariance(spec_of(family, *gamma, sigma2=4.0), K=2000)
        eigvals = np.linalg.eigvalsh(info.M)
        assert np.all(eigvals > 0)


def test_asymptotic_covariance_rejects_small_K():
    with pytest.raises(ValueError):
        asymptotic_covariance(spec_of("farima00", 0.2), K=10)


def test_nvar_matches_inverse_information_mc():
    # 500 replications at n = 3000
    spec = spec_of("farima00", 0.2, sigma2=4.0)
    n, reps = 3000, 500
    d_hats = np.empty(reps)
    for r in range(reps):
        series = simulate(spec, n, GenConfig(seed=550000 + r))
        d_hats[r] = fit_qmle(series, "farima00").gamma_hat[0]
    nvar = n * np.var(d_hats, ddof=1)
    target = 1.0 / asymptotic_covariance(spec).M[0, 0]
    assert abs(nvar - target) / target < 0.25


# ---------------------------------------------------------------------------
# BLUE and mean scales
# ---------------------------------------------------------------------------


def test_blue_weights_sum_to_one_exactly():
    r = autocovariance(spec_of("farima00", 0.3), 199)
    w = blue_weights(r)
    assert w.sum() == pytest.approx(1.0, abs=1e-15)


def test_blue_mean_white_noise_limit_is_sample_mean():
    series = Series(values=white_noise(200, seed=83) + 1.5)
    spec = spec_of("farima00", 1e-9, gamma_bounds=((1e-10, 0.49),))
    assert blue_mean(series, spec) == pytest.approx(series.values.mean(), rel=1e-8)


def test_blue_mean_matches_dense_solve():
    n = 500
    spec = spec_of("farima00", 0.3, sigma2=4.0)
    series = sim("farima00", (0.3,), 4.0, n, seed=89, mu=2.0)
    r = autocovariance(spec, n - 1)
    sigma = np.empty((n, n))
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    sigma[:] = r[idx]
    w_dense = np.linalg.solve(sigma, np.ones(n))
    mu_dense = float(w_dense @ series.values / w_dense.sum())
    assert blue_mean(series, spec) == pytest.approx(mu_dense, abs=1e-8)


def test_blue_efficiency_examples():
    assert 0.98 <= blue_efficiency(0.25) <= 1.0
    assert blue_efficiency(1e-9) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        blue_efficiency(0.0)
    with pytest.raises(ValueError):
        blue_efficiency(0.5)


def test_mean_clt_scale_values():
    assert mean_clt_scale(100, 0.0) == pytest.approx(10.0)
    assert mean_clt_scale(100, 0.3) == pytest.approx(100.0**0.2)
    with pytest.raises(ValueError):
        mean_clt_scale(0, 0.2)
    with pytest.raises(ValueError):
        mean_clt_scale(10, 0.5)


# ---------------------------------------------------------------------------
# Truncated predictor consistency
# ---------------------------------------------------------------------------


def test_predictor_truncation_error_decays():
    # Build paths with a stored presample, compare the windowed predictor to
    # the (nearly) full-past predictor at the true parameter; the squared gap
    # should decay roughly like t^(-2d).
    from scipy.signal import fftconvolve

    from longmem.simulate import rng_from_seed

    d = 0.3
    spec = spec_of("farima00", d)
    n, presample, K, reps = 1000, 9000, 20_000, 40
    a = ma_coeffs(spec, K)
    total = presample + n
    u_full = np.concatenate([[0.0], ar_coeffs(spec, total - 1)])
    gaps = np.zeros(n)
    for rep in range(reps):
        eps = rng_from_seed(123400 + rep).standard_normal(total + K)
        x_full = fftconvolve(eps, a, mode="valid")  # length total
        x_obs = x_full[presample:]
        m_full = fftconvolve(x_full, u_full)[:total][presample:]
        m_trunc = fftconvolve(x_obs, u_full[: n + 1])[:n]
        gaps += (m_full - m_trunc) ** 2 / reps
    # average the squared gap in dyadic blocks of t and regress on log t;
    # the squared gap is bounded by C t^(-2d) (its true decay is faster, near
    # t^(-1), because of cancellation), so assert compatibility with the bound
    edges = [(50, 100), (100, 200), (200, 400), (400, 800)]
    ts = np.array([math.sqrt(lo * hi) for lo, hi in edges])
    block_means = np.array([gaps[lo:hi].mean() for lo, hi in edges])
    slope = np.polyfit(np.log(ts), np.log(block_means), 1)[0]
    assert slope < -2.0 * d + 0.15  # decays at least as fast as the bound
    assert slope > -3.0
    C = block_means[0] * ts[0] ** (2.0 * d)
    assert np.all(block_means <= 1.05 * C * ts ** (-2.0 * d))
