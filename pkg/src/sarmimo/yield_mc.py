"""Monte-Carlo yield analysis over fabricated-chip realizations.

Mismatch is fixed once a chip is manufactured, so converter quality is a
per-chip lottery: the quantity that determines production yield is a
lower quantile of the EFR across chips, not its mean.  This module sweeps
(sigma_m, sigma_x) grids, evaluating each simulated chip either exactly
(cell enumeration + Gaussian interval moments) or by Monte Carlo on the
behavioral converter, and reports the quantile surface.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bussgang import cells_efr_curve, empirical_bussgang
from .numerics import empirical_quantile
from .quantizer import (
    MISMATCH_MODES,
    QuantizerSpec,
    enumerate_tf_cells,
    sample_mismatch,
    sar_convert,
)
from .seeding import generator_for

__all__ = ["YieldSweepConfig", "YieldSurface", "efr_quantile_surface"]

METHODS = ("exact-cells", "monte-carlo")

# rng stream tags, reserved per (sigma_m index, trial)
_CHIP_STREAM = 0
_EVAL_STREAM_BASE = 1


@dataclass(frozen=True)
class YieldSweepConfig:
    """Description of one quantile-EFR sweep.

    ``method='exact-cells'`` (default) removes all sampling noise from
    the quantile; ``method='monte-carlo'`` evaluates each chip with
    ``mc_samples`` Gaussian draws through the behavioral converter and
    exists as an independent cross-check of the exact path.
    """

    spec: QuantizerSpec
    sigma_m_grid: tuple[float, ...]
    sigma_x_grid: tuple[float, ...]
    trials: int = 500
    quantile: float = 0.10
    mode: str = "all-capacitors"
    method: str = "exact-cells"
    mc_samples: int = 1_000_000
    master_seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sigma_m_grid", tuple(float(s) for s in self.sigma_m_grid))
        object.__setattr__(self, "sigma_x_grid", tuple(float(s) for s in self.sigma_x_grid))
        if not self.sigma_m_grid or not self.sigma_x_grid:
            raise ValueError("sweep grids must be non-empty")
        if any(s < 0 for s in self.sigma_m_grid):
            raise ValueError("sigma_m grid must be >= 0")
        if any(s <= 0 for s in self.sigma_x_grid):
            raise ValueError("sigma_x grid must be > 0")
        if not 0.0 < self.quantile < 1.0:
            raise ValueError("quantile must lie in (0, 1)")
        if self.trials < 10.0 / self.quantile:
            raise ValueError("trials must be >= 10/quantile for a stable quantile")
        if self.mode not in MISMATCH_MODES:
            raise ValueError(f"mode must be one of {MISMATCH_MODES}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.method == "monte-carlo" and self.mc_samples < 1000:
            raise ValueError("mc_samples must be >= 1000")


@dataclass(frozen=True)
class YieldSurface:
    """Flat rows (sigma_m, sigma_x, quantile_efr, mean_efr, trials), sigma_m-major."""

    sigma_m: np.ndarray
    sigma_x: np.ndarray
    quantile_efr: np.ndarray
    mean_efr: np.ndarray
    trials: int
    quantile: float = field(default=0.10)

    def rows(self):
        for i in range(self.sigma_m.size):
            yield (
                float(self.sigma_m[i]),
                float(self.sigma_x[i]),
                float(self.quantile_efr[i]),
                float(self.mean_efr[i]),
                self.trials,
            )


def _trial_efr_curve(config: YieldSweepConfig, i_sigma_m: int, trial: int) -> np.ndarray:
    """EFR over the sigma_x grid for one simulated chip."""
    sigma_m = config.sigma_m_grid[i_sigma_m]
    rng = generator_for(config.master_seed, i_sigma_m, trial, _CHIP_STREAM)
    chip = sample_mismatch(config.spec, sigma_m, config.mode, rng)
    if config.method == "exact-cells":
        cells = enumerate_tf_cells(config.spec, chip)
        return cells_efr_curve(cells, np.asarray(config.sigma_x_grid))
    out = np.empty(len(config.sigma_x_grid))
    for j, sigma_x in enumerate(config.sigma_x_grid):
        eval_rng = generator_for(
            config.master_seed, i_sigma_m, trial, _EVAL_STREAM_BASE + j
        )
        report = empirical_bussgang(
            lambda x: sar_convert(x, config.spec, chip),
            sigma_x,
            config.mc_samples,
            eval_rng,
        )
        out[j] = report.efr
    return out


def efr_quantile_surface(config: YieldSweepConfig, threads: int = 1) -> YieldSurface:
    """Quantile-EFR surface over the (sigma_m, sigma_x) grid.

    For each sigma_m, ``config.trials`` independent chips are drawn with
    seeds derived from (master_seed, sigma_m index, trial index); each
    chip's EFR is evaluated on the full sigma_x grid and the per-point
    quantile and mean are taken across chips.  Results are identical for
    any ``threads`` value because aggregation is by grid index.
    """
    n_m = len(config.sigma_m_grid)
    n_x = len(config.sigma_x_grid)
    efr = np.empty((n_m, config.trials, n_x))

    tasks = [(i, t) for i in range(n_m) for t in range(config.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for (i, t), curve in zip(
                tasks, pool.map(lambda it: _trial_efr_curve(config, *it), tasks)
            ):
                efr[i, t] = curve
    else:
        for i, t in tasks:
            efr[i, t] = _trial_efr_curve(config, i, t)

    sm = np.repeat(np.asarray(config.sigma_m_grid), n_x)
    sx = np.tile(np.asarray(config.sigma_x_grid), n_m)
    quant = np.empty(n_m * n_x)
    mean = np.empty(n_m * n_x)
    for i in range(n_m):
        for j in range(n_x):
            vals = efr[i, :, j]
            quant[i * n_x + j] = empirical_quantile(vals, config.quantile)
            mean[i * n_x + j] = float(np.mean(vals))
    return YieldSurface(sm, sx, quant, mean, config.trials, config.quantile)
