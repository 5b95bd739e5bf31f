"""Command-line surface: simulate, fit, mc, blue, analyze.

Exit codes: 0 success, 1 I/O or validation error, 2 fit failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .estimate import FitResult, _stderr, blue_mean, fit_qmle, fit_whittle, predictors
from .models import Family, ModelSpec
from .montecarlo import MCConfig, emit_table, run_mc
from .simulate import GENERATORS, GenConfig, Series, series_from_csv, series_to_csv, simulate

__all__ = ["AnalysisResult", "detrend_linear", "main"]


@dataclass
class AnalysisResult:
    trend: tuple[float, float] | None  # (intercept, slope) of the OLS detrend
    fits: list[FitResult]
    mu_blue: float
    residual_mu4: float

    def as_dict(self) -> dict:
        return {
            "trend": list(self.trend) if self.trend is not None else None,
            "fits": [fit.as_dict() for fit in self.fits],
            "mu_blue": self.mu_blue,
            "residual_mu4": self.residual_mu4,
        }


def detrend_linear(series: Series) -> tuple[Series, float, float]:
    """OLS regression of X_t on t = 1..n; returns (residuals, intercept, slope)."""
    n = series.n
    if n < 3:
        raise ValueError("detrend_linear needs n >= 3")
    t = np.arange(1.0, n + 1)
    slope, intercept = np.polyfit(t, series.values, 1)
    resid = series.values - (intercept + slope * t)
    resid = resid - resid.mean()  # kill roundoff so the residual mean is exactly 0
    return Series(values=resid, meta=series.meta), float(intercept), float(slope)


def _residual_mu4(series: Series, fit: FitResult) -> float:
    resid = series.values - predictors(series.values, fit.family, fit.gamma_hat)
    std = resid / np.sqrt(fit.sigma2_hat)
    return float(np.mean(std**4))


def _load_series(path: str) -> Series:
    try:
        return series_from_csv(path)
    except (OSError, ValueError) as exc:
        raise SystemExit(_fail(f"cannot read series from {path}: {exc}"))


def _fail(message: str, code: int = 1) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _spec_from_args(args) -> ModelSpec:
    family = Family(args.family)
    gamma = (args.d,) if family is not Family.FARIMA10 else (args.d, args.alpha)
    return ModelSpec(family=family, gamma=gamma, sigma2=args.sigma2, mu=args.mu)


def cmd_simulate(args) -> int:
    try:
        spec = _spec_from_args(args)
        cfg = GenConfig(generator=args.generator, seed=args.seed, K=args.K, burnin=args.burnin)
        series = simulate(spec, args.n, cfg)
    except ValueError as exc:
        return _fail(str(exc))
    if args.out:
        series_to_csv(series, args.out)
    else:
        print("x")
        for v in series.values:
            print(f"{v:.17g}")
    return 0


def _run_fit(series: Series, family: Family, estimator: str, with_stderr: bool) -> FitResult:
    fit_fn = fit_whittle if estimator == "whittle" else fit_qmle
    return fit_fn(series, family, with_stderr=with_stderr)


def cmd_fit(args) -> int:
    series = _load_series(args.input)
    try:
        family = Family(args.family)
    except ValueError as exc:
        return _fail(str(exc))
    if args.detrend:
        series, _, _ = detrend_linear(series)
    try:
        fit = _run_fit(series, family, args.estimator, args.stderr)
    except ValueError as exc:
        return _fail(str(exc))
    _emit(fit.as_dict(), args.out)
    return 0 if fit.converged else 2


def cmd_mc(args) -> int:
    try:
        config = MCConfig.from_json(args.config)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"bad MC config: {exc}")
    report = run_mc(config, workers=args.workers)
    if args.out:
        report.to_json(args.out)
    if args.table:
        print(emit_table(report, format=args.table))
    elif not args.out:
        _emit(report.as_dict(), None)
    return 0


def cmd_blue(args) -> int:
    series = _load_series(args.input)
    try:
        spec = _spec_from_args(args)
        mu = blue_mean(series, spec)
    except (ValueError, RuntimeError) as exc:
        return _fail(str(exc))
    _emit({"mu_blue": mu, "n": series.n, "family": spec.family.value}, args.out)
    return 0


def cmd_analyze(args) -> int:
    series = _load_series(args.input)
    trend = None
    work = series
    if args.detrend:
        work, intercept, slope = detrend_linear(series)
        trend = (intercept, slope)

    try:
        families = [Family(f) for f in (args.family or ["farima00", "lm"])]
    except ValueError as exc:
        return _fail(str(exc))
    estimators = args.estimator or ["qmle"]
    fits: list[FitResult] = []
    failed = False
    for family in families:
        for est in estimators:
            try:
                fit = _run_fit(work, family, est, with_stderr=False)
                # sigma2 standard error uses the fourth moment estimated from
                # this fit's standardized residuals (noise-distribution-dependent)
                fit.stderr = _stderr(
                    fit.family, fit.gamma_hat, fit.sigma2_hat, work.n, _residual_mu4(work, fit)
                )
            except (ValueError, RuntimeError) as exc:
                print(f"warning: {family.value}/{est} fit failed: {exc}", file=sys.stderr)
                failed = True
                continue
            failed = failed or not fit.converged
            fits.append(fit)
    if not fits:
        return _fail("all fits failed", code=2)

    qmle_fits = [f for f in fits if f.estimator == "qmle"] or fits
    best = min(qmle_fits, key=lambda f: f.sigma2_hat)
    try:
        best_spec = ModelSpec(family=best.family, gamma=best.gamma_hat, sigma2=best.sigma2_hat)
        mu_blue = blue_mean(series, best_spec)  # mean of the raw, non-detrended series
    except (ValueError, RuntimeError) as exc:
        return _fail(f"BLUE mean under the best fit failed: {exc}", code=2)
    result = AnalysisResult(
        trend=trend,
        fits=fits,
        mu_blue=mu_blue,
        residual_mu4=_residual_mu4(work, best),
    )
    _emit(result.as_dict(), args.out)
    return 2 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longmem",
        description="Long-memory linear processes: simulation, QMLE/Whittle fitting, "
        "BLUE means, Monte Carlo sqrt-MSE tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p, need_n=False):
        p.add_argument("--family", default="farima00", help="farima00 | farima10 | lm")
        p.add_argument("--d", type=float, default=0.2, help="memory parameter")
        p.add_argument("--alpha", type=float, default=0.0, help="AR parameter (farima10)")
        p.add_argument("--sigma2", type=float, default=1.0, help="innovation variance")
        p.add_argument("--mu", type=float, default=0.0, help="location parameter")
        if need_n:
            p.add_argument("--n", type=int, required=True, help="trajectory length")

    p = sub.add_parser("simulate", help="simulate a trajectory to CSV")
    add_model_flags(p, need_n=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generator", default="exact-gaussian", choices=GENERATORS)
    p.add_argument("--K", type=int, default=None, help="truncated-ma MA truncation")
    p.add_argument("--burnin", type=int, default=0, help="truncated-ma burn-in")
    p.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one family to a CSV series")
    p.add_argument("input", help="CSV series path")
    p.add_argument("--family", default="farima00")
    p.add_argument("--estimator", default="qmle", choices=["qmle", "whittle"])
    p.add_argument("--detrend", action="store_true")
    p.add_argument("--stderr", action="store_true", help="include asymptotic standard errors")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("mc", help="run a Monte Carlo campaign from a JSON config")
    p.add_argument("--config", required=True, help="MCConfig JSON path")
    p.add_argument("--out", default=None, help="write the full report JSON here")
    p.add_argument("--table", default=None, choices=["csv", "markdown"])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("blue", help="BLUE mean of a CSV series under a fixed model")
    p.add_argument("input", help="CSV series path")
    add_model_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_blue)

    p = sub.add_parser("analyze", help="detrend, fit families, report JSON summary")
    p.add_argument("input", help="CSV series path")
    p.add_argument("--family", action="append", help="repeatable; default farima00 and lm")
    p.add_argument("--estimator", action="append", choices=["qmle", "whittle"])
    p.add_argument("--detrend", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
