"""Long-memory causal linear processes: simulation, quasi-maximum likelihood
and Whittle estimation, BLUE location estimation, and Monte Carlo sqrt-MSE
benchmarking."""

from .estimate import (
    AsymptoticInfo,
    FitResult,
    IdentifiabilityError,
    ToeplitzError,
    asymptotic_covariance,
    blue_efficiency,
    blue_mean,
    blue_weights,
    fit_qmle,
    fit_whittle,
    fourier_frequencies,
    mean_clt_scale,
    periodogram,
    qmle_gradient,
    qmle_objective,
    quasi_loglik,
    spectral_density,
    truncated_predictor,
)
from .models import (
    CoeffTable,
    Family,
    ModelSpec,
    ar_coeffs,
    ar_polynomial,
    autocovariance,
    coeff_table,
    dar_coeffs,
    default_gamma_bounds,
    invert_series,
    ma_coeffs,
)
from .montecarlo import MCCell, MCConfig, MCReport, emit_table, run_mc
from .simulate import (
    EmbeddingError,
    GenConfig,
    Series,
    derive_seed,
    series_from_csv,
    series_to_csv,
    simulate,
    white_noise,
)
from .specfun import beta_fn, log_gamma, riemann_zeta

__version__ = "0.1.0"

__all__ = [
    "AsymptoticInfo",
    "CoeffTable",
    "EmbeddingError",
    "Family",
    "FitResult",
    "GenConfig",
    "IdentifiabilityError",
    "MCCell",
    "MCConfig",
    "MCReport",
    "ModelSpec",
    "Series",
    "ToeplitzError",
    "ar_coeffs",
    "ar_polynomial",
    "asymptotic_covariance",
    "autocovariance",
    "beta_fn",
    "blue_efficiency",
    "blue_mean",
    "blue_weights",
    "coeff_table",
    "dar_coeffs",
    "default_gamma_bounds",
    "derive_seed",
    "emit_table",
    "fit_qmle",
    "fit_whittle",
    "fourier_frequencies",
    "invert_series",
    "log_gamma",
    "ma_coeffs",
    "mean_clt_scale",
    "periodogram",
    "qmle_gradient",
    "qmle_objective",
    "quasi_loglik",
    "riemann_zeta",
    "run_mc",
    "series_from_csv",
    "series_to_csv",
    "simulate",
    "spectral_density",
    "truncated_predictor",
    "white_noise",
]
