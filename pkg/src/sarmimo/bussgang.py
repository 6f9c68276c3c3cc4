"""Bussgang decomposition figures of merit for quantizer transfer functions.

For a zero-mean Gaussian input X with std-dev sigma_x and a transfer
function f, the decomposition f(X) = beta*X + D (D uncorrelated with X)
gives

    beta = E[X f(X)] / sigma_x^2
    E[D^2] = E[f^2(X)] - beta^2 sigma_x^2
    SDR = beta^2 sigma_x^2 / E[D^2]
    EFR = (SDR_dB + 10*log10(2*(pi-2))) / (20*log10(2))

The EFR offset calibrates a 1-bit quantizer to exactly 1 bit, and one
bit is gained per 6.02 dB of SDR.  Closed forms are provided for the
ideal mid-rise staircase and for the MSB-shift clip model (four sign
quadrants); arbitrary realized transfer functions are handled exactly
through their cell tables or empirically by Monte Carlo.

Any mean offset of f(X) is deliberately kept inside E[D^2]; no bias
removal is applied anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import gaussian_interval_moments, q_function, std_normal_pdf
from .quantizer import CellTable, MsbMismatch, QuantizerSpec

__all__ = [
    "BussgangReport",
    "EFR_OFFSET_DB",
    "DB_PER_BIT",
    "ideal_gain",
    "ideal_second_moment",
    "msb_gain",
    "msb_second_moment",
    "make_report",
    "empirical_bussgang",
    "cells_bussgang",
    "ideal_efr",
    "msb_efr",
    "peak_efr",
]

EFR_OFFSET_DB = 10.0 * math.log10(2.0 * (math.pi - 2.0))  # 3.5854 dB
DB_PER_BIT = 20.0 * math.log10(2.0)  # 6.0206 dB

_PHI0 = 1.0 / math.sqrt(2.0 * math.pi)
_DISTORTION_TOL = 1e-12


@dataclass(frozen=True)
class BussgangReport:
    """Gain, moments and figures of merit for one (transfer function, sigma_x)."""

    beta: float
    second_moment: float
    distortion_power: float
    sdr: float
    sdr_db: float
    efr: float
    sigma_x: float


def make_report(beta: float, second_moment: float, sigma_x: float) -> BussgangReport:
    """Assemble a report from the gain and output second moment.

    Distortion-free transfer functions get an infinite-SDR sentinel
    instead of an error so that sweep code stays total.  A distortion
    power below -1e-12 signals an inconsistent (beta, E[f^2]) pair and
    raises.
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    distortion = second_moment - beta * beta * sigma_x * sigma_x
    if distortion < -_DISTORTION_TOL:
        raise ValueError(
            f"negative distortion power {distortion!r}: inconsistent beta/second moment"
        )
    distortion = max(distortion, 0.0)
    signal = beta * beta * sigma_x * sigma_x
    if distortion == 0.0:
        sdr = sdr_db = efr = math.inf
    elif signal == 0.0:
        sdr = 0.0
        sdr_db = efr = -math.inf
    else:
        sdr = signal / distortion
        sdr_db = 10.0 * math.log10(sdr)
        efr = (sdr_db + EFR_OFFSET_DB) / DB_PER_BIT
    return BussgangReport(
        beta=float(beta),
        second_moment=float(second_moment),
        distortion_power=float(distortion),
        sdr=sdr,
        sdr_db=sdr_db,
        efr=efr,
        sigma_x=float(sigma_x),
    )


def ideal_gain(spec: QuantizerSpec, sigma_x: float) -> float:
    """Bussgang gain of the ideal mid-rise staircase.

    beta = (delta/sigma) * (phi(0) + 2*sum_{k=1}^{2^(N-1)-1} phi(k*delta/sigma)),
    a sampled Riemann sum of the Gaussian density over the converter
    range; as N grows it approaches the clipping-only gain 1 - 2Q(1/sigma).
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    d = spec.delta
    k = np.arange(1, 2 ** (spec.bits - 1))
    return float((d / sigma_x) * (_PHI0 + 2.0 * np.sum(std_normal_pdf(k * d / sigma_x))))


def ideal_second_moment(spec: QuantizerSpec, sigma_x: float) -> float:
    """E[f^2(X)] of the ideal staircase via per-bin interval moments.

    Sums level^2 * P(bin) over the bins covering [0, 1] (levels
    (k+1/2)*delta for k = 0 .. 2^(N-1)-1) plus the clipping term
    (1-delta/2)^2 * Q(1/sigma), doubled by even symmetry.
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    d = spec.delta
    k = np.arange(0, 2 ** (spec.bits - 1))
    levels = (k + 0.5) * d
    prob = gaussian_interval_moments(k * d, (k + 1) * d, sigma_x).prob
    top = 1.0 - d / 2.0
    return float(2.0 * np.sum(levels**2 * prob) + 2.0 * top**2 * q_function(1.0 / sigma_x))


def _half_gain(m: float, sigma: float) -> float:
    # contribution of one half-line of the clip model to the gain
    if m >= 0:
        return q_function(m / sigma) - q_function((1.0 + m) / sigma)
    return 0.5 - q_function((1.0 + m) / sigma) - (m / sigma) * _PHI0


def _half_second_moment(m: float, sigma: float) -> float:
    # E[f^2 1{X>0}] of one half-line of the clip model
    b = (1.0 + m) / sigma
    if m >= 0:
        a = m / sigma
        return (
            (sigma * sigma + m * m) * (q_function(a) - q_function(b))
            + q_function(b)
            + sigma * ((m - 1.0) * std_normal_pdf(b) - m * std_normal_pdf(a))
        )
    return (
        (sigma * sigma + m * m) / 2.0
        + q_function(b) * (1.0 - sigma * sigma - m * m)
        + sigma * ((m - 1.0) * std_normal_pdf(b) - 2.0 * m * _PHI0)
    )


def msb_gain(m: MsbMismatch, sigma_x: float) -> float:
    """Bussgang gain of the MSB-shift clip model, case-matched per sign.

    Each half-line contributes Q(m/s) - Q((1+m)/s) for m >= 0 and
    1/2 - Q((1+m)/s) - (m/s)*phi(0) for m < 0 (the phi(0) term is the
    jump at the origin); the four sign quadrants are continuous across
    m -> 0.
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    return _half_gain(m.m1, sigma_x) + _half_gain(m.m2, sigma_x)


def msb_second_moment(m: MsbMismatch, sigma_x: float) -> float:
    """E[f^2(X)] of the MSB-shift clip model.

    By the mirror symmetry of the two half-lines this is g(m1) + g(m2)
    where g integrates (x-m)^2 over the linear span plus the clip mass:

        g(m>=0) = (s^2+m^2)(Q(m/s) - Q((1+m)/s)) + Q((1+m)/s)
                  + s((m-1)phi((1+m)/s) - m phi(m/s))
        g(m<0)  = (s^2+m^2)/2 + Q((1+m)/s)(1 - s^2 - m^2)
                  + s((m-1)phi((1+m)/s) - 2m phi(0))
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    return _half_second_moment(m.m1, sigma_x) + _half_second_moment(m.m2, sigma_x)


def empirical_bussgang(
    tf: Callable[[np.ndarray], np.ndarray],
    sigma_x: float,
    n_samples: int,
    rng: np.random.Generator,
) -> BussgangReport:
    """Monte-Carlo Bussgang report for an arbitrary transfer function.

    Estimates beta = sum(x*f(x))/sum(x^2) and E[f^2] as the sample mean.
    The report is assembled against the sample second moment of x (not
    the nominal sigma_x^2) so the distortion estimate is nonnegative by
    Cauchy-Schwarz; the standard error of beta shrinks as 1/sqrt(n).
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    x = rng.standard_normal(int(n_samples)) * sigma_x
    fx = np.asarray(tf(x), dtype=float)
    xx = float(np.dot(x, x))
    beta_hat = float(np.dot(x, fx)) / xx
    second = float(np.mean(fx * fx))
    sample_sigma = math.sqrt(xx / x.size)
    return make_report(beta_hat, second, sample_sigma)


def cells_bussgang(cells: CellTable, sigma_x: float) -> BussgangReport:
    """Exact Bussgang report for a piecewise-constant transfer function.

    beta = sum(level * first-moment(cell)) / sigma^2 and
    E[f^2] = sum(level^2 * prob(cell)), exact up to special-function
    precision; replaces sampling noise in yield sweeps.
    """
    if sigma_x <= 0:
        raise ValueError("sigma_x must be > 0")
    cells.validate()
    mom = gaussian_interval_moments(cells.lower, cells.upper, sigma_x)
    beta = float(np.sum(cells.level * mom.first)) / (sigma_x * sigma_x)
    second = float(np.sum(cells.level**2 * mom.prob))
    return make_report(beta, second, sigma_x)


def cells_efr_curve(cells: CellTable, sigma_grid: np.ndarray) -> np.ndarray:
    """EFR of a cell table over a grid of input std-devs (vectorized)."""
    sig = np.asarray(sigma_grid, dtype=float)
    if np.any(sig <= 0):
        raise ValueError("sigma grid must be > 0")
    mom = gaussian_interval_moments(
        cells.lower[None, :], cells.upper[None, :], sig[:, None]
    )
    beta = np.sum(cells.level[None, :] * mom.first, axis=1) / sig**2
    second = np.sum(cells.level[None, :] ** 2 * mom.prob, axis=1)
    signal = beta**2 * sig**2
    distortion = np.maximum(second - signal, 0.0)
    with np.errstate(divide="ignore"):
        sdr_db = 10.0 * np.log10(np.where(distortion > 0, signal / distortion, np.inf))
    return (sdr_db + EFR_OFFSET_DB) / DB_PER_BIT


def ideal_efr(spec: QuantizerSpec, sigma_x: float) -> float:
    """EFR of the ideal staircase at one input std-dev."""
    return make_report(ideal_gain(spec, sigma_x), ideal_second_moment(spec, sigma_x), sigma_x).efr


def msb_efr(m: MsbMismatch, sigma_x: float) -> float:
    """EFR of the MSB-shift clip model at one input std-dev."""
    return make_report(msb_gain(m, sigma_x), msb_second_moment(m, sigma_x), sigma_x).efr


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def peak_efr(
    efr_of_sigma: Callable[[float], float],
    sigma_lo: float = 0.02,
    sigma_hi: float = 3.0,
    grid_points: int = 256,
    tol: float = 1e-4,
) -> tuple[float, float]:
    """Locate the input std-dev maximizing an EFR curve.

    Deterministic: a log-spaced grid scan brackets the maximum and
    golden-section refinement narrows it to ``tol`` in sigma.  If the
    grid argmax lands on a boundary (flat or monotone curve) the grid
    point itself is returned.
    """
    sig = np.geomspace(sigma_lo, sigma_hi, grid_points)
    vals = np.array([float(efr_of_sigma(s)) for s in sig])
    if np.any(np.isnan(vals)):
        raise ValueError("EFR curve produced NaN")
    i = int(np.argmax(vals))
    if i == 0 or i == sig.size - 1:
        return float(sig[i]), float(vals[i])

    a, b = float(sig[i - 1]), float(sig[i + 1])
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = float(efr_of_sigma(c)), float(efr_of_sigma(d))
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = float(efr_of_sigma(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = float(efr_of_sigma(d))
    s_star = (a + b) / 2.0
    e_star = float(efr_of_sigma(s_star))
    if vals[i] > e_star:  # never report worse than the grid scan
        return float(sig[i]), float(vals[i])
    return s_star, e_star
