"""Gaussian special functions and shared numerical utilities.

Everything in this module is pure: the standard-normal density and
Q-function, truncated-Gaussian interval moments (the kernel behind all
closed-form quantizer analyses), a panel-wise adaptive-quadrature
expectation used as an independent oracle for those closed forms, and the
nearest-rank quantile used by the yield experiments.

Scalar arguments give scalar results; numpy arrays broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "IntervalMoments",
    "std_normal_pdf",
    "q_function",
    "gaussian_interval_moments",
    "quadrature_expectation",
    "empirical_quantile",
]

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Quadrature integrates on [-10*sigma, 10*sigma]; the remaining Gaussian
# mass is Q(10) ~ 7.6e-24, far below the 1e-10 accuracy target.
_TAIL_SIGMAS = 10.0


@dataclass(frozen=True)
class IntervalMoments:
    """Moments of X ~ N(0, sigma^2) restricted to an interval [a, b].

    prob   = P(a < X < b)
    first  = E[X  * 1{a < X < b}]
    second = E[X^2 * 1{a < X < b}]
    """

    prob: float | np.ndarray
    first: float | np.ndarray
    second: float | np.ndarray


def _finite_array(t, name: str) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def _phi(z):
    # tolerates +-inf (density -> 0)
    return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


def _q(z):
    # tolerates +-inf (erfc(-inf) = 2, erfc(inf) = 0)
    return 0.5 * special.erfc(np.asarray(z, dtype=float) / _SQRT2)


def std_normal_pdf(t):
    """Standard Gaussian density exp(-t^2/2) / sqrt(2*pi)."""
    arr = _finite_array(t, "t")
    out = _phi(arr)
    return float(out) if np.ndim(t) == 0 else out


def q_function(t):
    """Upper-tail probability of a standard Gaussian.

    Computed through the complementary error function, which keeps full
    relative accuracy deep into the tail (needed for small input gains).
    """
    arr = _finite_array(t, "t")
    out = _q(arr)
    return float(out) if np.ndim(t) == 0 else out


def gaussian_interval_moments(a, b, sigma) -> IntervalMoments:
    """Zeroth/first/second moments of N(0, sigma^2) restricted to [a, b].

    Closed forms for X ~ N(0, sigma^2):

        prob   = Q(a/sigma) - Q(b/sigma)
        first  = sigma * (phi(a/sigma) - phi(b/sigma))
        second = sigma^2 * prob + sigma * (a*phi(a/sigma) - b*phi(b/sigma))

    with the convention (+-inf) * phi(+-inf) = 0.  Endpoints may be
    +-inf; ``a``, ``b`` and ``sigma`` broadcast.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    s_arr = np.asarray(sigma, dtype=float)
    if np.any(np.isnan(a_arr)) or np.any(np.isnan(b_arr)):
        raise ValueError("interval endpoints must not be NaN")
    if np.any(a_arr > b_arr):
        raise ValueError("interval must satisfy a <= b")
    if np.any(~np.isfinite(s_arr)) or np.any(s_arr <= 0):
        raise ValueError("sigma must be finite and > 0")

    za = a_arr / s_arr
    zb = b_arr / s_arr
    pa = _phi(za)
    pb = _phi(zb)
    prob = _q(za) - _q(zb)
    first = s_arr * (pa - pb)
    with np.errstate(invalid="ignore"):
        ea = np.where(np.isinf(a_arr), 0.0, a_arr * pa)
        eb = np.where(np.isinf(b_arr), 0.0, b_arr * pb)
    second = np.square(s_arr) * prob + s_arr * (ea - eb)

    scalar = np.ndim(a) == 0 and np.ndim(b) == 0 and np.ndim(sigma) == 0
    if scalar:
        return IntervalMoments(float(prob), float(first), float(second))
    return IntervalMoments(prob, first, second)


def quadrature_expectation(g, sigma, breakpoints=()) -> float:
    """E[g(X)] for X ~ N(0, sigma^2) by panel-wise adaptive quadrature.

    ``breakpoints`` must list (in ascending order) every discontinuity or
    kink of ``g``; each panel between consecutive breakpoints is then
    smooth and handed to ``scipy.integrate.quad``.  Integration is
    truncated at ``+-10*sigma`` and the tails are added analytically
    assuming ``g`` is constant there, which holds for every saturating
    transfer function in this package and is irrelevant at Q(10) mass for
    anything polynomially bounded.

    Absolute accuracy target: 1e-10.
    """
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma <= 0:
        raise ValueError("sigma must be finite and > 0")
    bps = [float(p) for p in breakpoints]
    if any(math.isnan(p) for p in bps):
        raise ValueError("breakpoints must not be NaN")
    if any(bps[i] > bps[i + 1] for i in range(len(bps) - 1)):
        raise ValueError("breakpoints must be sorted ascending")

    lim = _TAIL_SIGMAS * sigma
    edges = sorted({-lim, lim, *(p for p in bps if -lim < p < lim)})

    def integrand(x: float) -> float:
        return float(g(x)) * math.exp(-0.5 * (x / sigma) ** 2) / (sigma * _SQRT_2PI)

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            val, _err = integrate.quad(
                integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200
            )
            total += val
    tail_mass = float(_q(_TAIL_SIGMAS))
    total += (float(g(lim)) + float(g(-lim))) * tail_mass
    return total


def empirical_quantile(samples, q: float) -> float:
    """Nearest-rank quantile: the ceil(q*n)-th smallest sample (1-based).

    No interpolation, so the result is always an element of the input;
    for yield metrics the quantile must be an actually realized outcome.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly inside (0, 1)")
    data = np.sort(np.asarray(samples, dtype=float).ravel())
    if data.size == 0:
        raise ValueError("samples must be non-empty")
    idx = int(math.ceil(q * data.size)) - 1
    return float(data[min(max(idx, 0), data.size - 1)])
