"""Replication engine for the sqrt-MSE benchmark tables.

A campaign is a grid of (parameter cell) x (trajectory length) x
(replication).  Replication r of cell c at length n always uses the seed
stream derived from (base_seed, c, n_index, r), so the report is identical
for any worker count.  Failed fits (non-convergence or a boundary-pinned
gamma) are excluded from the aggregates and counted.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from io import StringIO

import numpy as np

from .estimate import fit_qmle, fit_whittle
from .models import GAMMA_NAMES, Family, ModelSpec
from .simulate import (
    GenConfig,
    Series,
    _sample_exact_gaussian,
    _sample_truncated_ma,
    derive_seed,
    rng_from_seed,
)

logger = logging.getLogger(__name__)

__all__ = ["MCCell", "MCConfig", "MCRecord", "MCReport", "run_mc", "emit_table"]

_ESTIMATORS = {"qmle": fit_qmle, "whittle": fit_whittle}


@dataclass(frozen=True)
class MCCell:
    """One true-parameter cell (gamma*, sigma2*), with optional overrides."""

    gamma: tuple[float, ...]
    sigma2: float
    mu: float = 0.0
    gamma_bounds: tuple[tuple[float, float], ...] | None = None

    def label(self) -> str:
        parts = [f"{v:g}" for v in self.gamma]
        return "g=(" + ",".join(parts) + f") s2={self.sigma2:g}"

    def spec(self, family: Family) -> ModelSpec:
        return ModelSpec(
            family=family,
            gamma=self.gamma,
            sigma2=self.sigma2,
            mu=self.mu,
            gamma_bounds=self.gamma_bounds,
        )


@dataclass(frozen=True)
class MCConfig:
    family: Family
    cells: tuple[MCCell, ...]
    n_grid: tuple[int, ...] = (300, 1000, 3000)  # desk scale; go bigger explicitly
    replications: int = 300
    estimators: tuple[str, ...] = ("qmle",)
    base_seed: int = 20240915
    generator: str = "exact-gaussian"
    gen_K_mult: int = 10  # truncated-ma: K = mult * n
    gen_burnin_mult: int = 10

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(
            self, "cells", tuple(c if isinstance(c, MCCell) else MCCell(**c) for c in self.cells)
        )
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        for est in self.estimators:
            if est not in _ESTIMATORS:
                raise ValueError(f"unknown estimator {est!r}")
        for cell in self.cells:
            cell.spec(self.family)  # validate every cell eagerly

    @classmethod
    def from_json(cls, path) -> "MCConfig":
        with open(path) as fh:
            raw = json.load(fh)
        cells = tuple(
            MCCell(
                gamma=tuple(c["gamma"]),
                sigma2=float(c["sigma2"]),
                mu=float(c.get("mu", 0.0)),
                gamma_bounds=(
                    tuple(tuple(b) for b in c["gamma_bounds"]) if c.get("gamma_bounds") else None
                ),
            )
            for c in raw["cells"]
        )
        return cls(
            family=Family(raw["family"]),
            cells=cells,
            n_grid=tuple(raw.get("n_grid", (300, 1000, 3000))),
            replications=int(raw.get("replications", 300)),
            estimators=tuple(raw.get("estimators", ["qmle"])),
            base_seed=int(raw.get("base_seed", 20240915)),
            generator=raw.get("generator", "exact-gaussian"),
            gen_K_mult=int(raw.get("gen_K_mult", 10)),
            gen_burnin_mult=int(raw.get("gen_burnin_mult", 10)),
        )


@dataclass
class MCRecord:
    cell_index: int
    cell_label: str
    gamma_star: tuple[float, ...]
    sigma2_star: float
    n: int
    estimator: str
    coord: str
    sqrt_mse: float
    bias: float
    mc_se: float
    replications_used: int
    failures: int


@dataclass
class MCReport:
    config: MCConfig
    records: list[MCRecord]
    # raw per-replication estimates: (cell_index, n, estimator) ->
    # array of shape (R, p) with columns gamma..., sigma2; failed rows hold NaN
    raw: dict[tuple[int, int, str], np.ndarray] = field(default_factory=dict)

    def lookup(self, cell_index: int, n: int, estimator: str, coord: str) -> MCRecord:
        for rec in self.records:
            if (
                rec.cell_index == cell_index
                and rec.n == n
                and rec.estimator == estimator
                and rec.coord == coord
            ):
                return rec
        raise KeyError((cell_index, n, estimator, coord))

    def as_dict(self) -> dict:
        return {
            "family": self.config.family.value,
            "replications": self.config.replications,
            "base_seed": self.config.base_seed,
            "records": [vars(rec) | {"gamma_star": list(rec.gamma_star)} for rec in self.records],
            "raw": [
                {
                    "cell_index": key[0],
                    "n": key[1],
                    "estimator": key[2],
                    "estimates": [[None if np.isnan(v) else v for v in row] for row in val],
                }
                for key, val in self.raw.items()
            ],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=1)


def _simulate_replication(spec: ModelSpec, n: int, config: MCConfig, seed_seq) -> np.ndarray:
    rng = rng_from_seed(seed_seq)
    if config.generator == "exact-gaussian":
        return _sample_exact_gaussian(spec, n, rng)
    cfg = GenConfig(
        generator="truncated-ma",
        seed=0,
        K=config.gen_K_mult * n,
        burnin=config.gen_burnin_mult * n,
    )
    return _sample_truncated_ma(spec, n, cfg, rng)


def _run_block(config, spec, n, n_index, cell_index, reps, estimates):
    for r in reps:
        seed_seq = derive_seed(config.base_seed, cell_index, n_index, r)
        values = _simulate_replication(spec, n, config, seed_seq)
        series = Series(values=values)
        for est in config.estimators:
            try:
                fit = _ESTIMATORS[est](series, config.family, bounds=spec.gamma_bounds)
            except Exception:
                logger.exception(
                    "fit %s failed: cell %d, n %d, replication %d", est, cell_index, n, r
                )
                continue
            if not fit.converged or fit.boundary_pinned:
                continue
            estimates[est][r] = list(fit.gamma_hat) + [fit.sigma2_hat]


def run_mc(config: MCConfig, workers: int = 1) -> MCReport:
    """Run the campaign; deterministic for a given config, any worker count."""
    coord_names = GAMMA_NAMES[config.family] + ("sigma2",)
    p = len(coord_names)
    R = config.replications
    records: list[MCRecord] = []
    raw: dict[tuple[int, int, str], np.ndarray] = {}

    for cell_index, cell in enumerate(config.cells):
        spec = cell.spec(config.family)
        theta_star = np.array(list(cell.gamma) + [cell.sigma2])
        for n_index, n in enumerate(config.n_grid):
            estimates = {est: np.full((R, p), np.nan) for est in config.estimators}
            blocks = np.array_split(np.arange(R), max(1, min(4 * workers, R)))
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    futures = [
                        pool.submit(
                            _run_block, config, spec, n, n_index, cell_index, block, estimates
                        )
                        for block in blocks
                        if block.size
                    ]
                    for fut in futures:
                        fut.result()
            else:
                for block in blocks:
                    _run_block(config, spec, n, n_index, cell_index, block, estimates)

            for est in config.estimators:
                table = estimates[est]
                raw[(cell_index, n, est)] = table
                ok = ~np.isnan(table[:, 0])
                used = int(ok.sum())
                failures = R - used
                for j, coord in enumerate(coord_names):
                    if used == 0:
                        sqrt_mse = bias = mc_se = float("nan")
                    else:
                        err = table[ok, j] - theta_star[j]
                        mse = float(np.mean(err**2))
                        sqrt_mse = float(np.sqrt(mse))
                        bias = float(np.mean(err))
                        # delta method: se(sqrt(MSE)) = se(MSE) / (2 sqrt(MSE))
                        se_mse = float(np.std(err**2, ddof=1)) / np.sqrt(used) if used > 1 else float("nan")
                        mc_se = se_mse / (2.0 * sqrt_mse) if sqrt_mse > 0 else float("nan")
                    records.append(
                        MCRecord(
                            cell_index=cell_index,
                            cell_label=cell.label(),
                            gamma_star=cell.gamma,
                            sigma2_star=cell.sigma2,
                            n=n,
                            estimator=est,
                            coord=coord,
                            sqrt_mse=sqrt_mse,
                            bias=bias,
                            mc_se=mc_se,
                            replications_used=used,
                            failures=failures,
                        )
                    )
    return MCReport(config=config, records=records, raw=raw)


def emit_table(report: MCReport, format: str = "markdown") -> str:
    """sqrt-MSE table: one row per (n, estimator), one column per
    (cell, coordinate)."""
    if not report.records:
        raise ValueError("empty report")
    config = report.config
    coord_names = GAMMA_NAMES[config.family] + ("sigma2",)
    columns = [
        (cell_index, cell.label(), coord)
        for cell_index, cell in enumerate(config.cells)
        for coord in coord_names
    ]
    header = ["n", "estimator"] + [f"{label} {coord}" for _, label, coord in columns]
    rows = []
    for n in config.n_grid:
        for est in config.estimators:
            row = [str(n), est]
            for cell_index, _, coord in columns:
                rec = report.lookup(cell_index, n, est, coord)
                row.append(f"{rec.sqrt_mse:.17g}")
            rows.append(row)

    if format == "csv":
        import csv as _csv

        buf = StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if format == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "|" + "|".join("---" for _ in header) + "|",
        ]
        for row in rows:
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")
