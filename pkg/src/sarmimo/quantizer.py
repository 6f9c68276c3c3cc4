"""Transfer-function models for ideal and mismatched SAR converters.

The converter is normalized to a [-1, +1] full scale.  Four models live
here:

* the ideal mid-rise staircase,
* a behavioral SAR conversion (bitwise binary search with per-capacitor
  weight errors on the positive and negative CDAC arrays),
* the piecewise-linear clip model that isolates the MSB shift,
* an exact cell enumeration of a realized SAR transfer function
  (piecewise-constant representation obtained from the decision tree).

Evaluation functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuantizerSpec",
    "MismatchRealization",
    "MsbMismatch",
    "CellTable",
    "MISMATCH_MODES",
    "ideal_midrise_quantize",
    "sample_mismatch",
    "sar_convert",
    "msb_model_eval",
    "enumerate_tf_cells",
]

MISMATCH_MODES = ("all-capacitors", "msb-only", "none")


@dataclass(frozen=True)
class QuantizerSpec:
    """N-bit mid-rise quantizer on [-1, +1] with LSB step 2^(1-N)."""

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, (int, np.integer)) or self.bits < 1:
            raise ValueError("bits must be an integer >= 1")

    @property
    def delta(self) -> float:
        return 2.0 ** (1 - self.bits)

    def levels(self) -> np.ndarray:
        """All output levels: odd multiples of delta/2 in [-1+delta/2, 1-delta/2]."""
        codes = np.arange(2**self.bits)
        return (2 * codes + 1) * 2.0 ** (-self.bits) - 1.0


@dataclass(frozen=True)
class MismatchRealization:
    """One fabricated chip: relative capacitor deviations per array.

    ``delta_p[k-1]`` is the relative deviation of the k-th switched
    capacitor (k=1 is the MSB) on the positive CDAC, ``delta_n`` the same
    for the negative CDAC.  ``sigma_m`` records the std-dev parameter the
    realization was sampled with.
    """

    delta_p: np.ndarray
    delta_n: np.ndarray
    sigma_m: float = 0.0

    def __post_init__(self):
        dp = np.atleast_1d(np.asarray(self.delta_p, dtype=float))
        dn = np.atleast_1d(np.asarray(self.delta_n, dtype=float))
        if dp.ndim != 1 or dn.ndim != 1 or dp.size != dn.size:
            raise ValueError("delta_p and delta_n must be 1-d with equal length")
        if np.any(dp <= -1) or np.any(dn <= -1):
            raise ValueError("relative deviations must be > -1")
        object.__setattr__(self, "delta_p", dp)
        object.__setattr__(self, "delta_n", dn)

    @property
    def bits(self) -> int:
        return self.delta_p.size + 1

    def msb_mismatch(self) -> "MsbMismatch":
        """The pair of normalized MSB transfer-function shifts (m = delta/2)."""
        if self.delta_p.size == 0:
            return MsbMismatch(0.0, 0.0)
        return MsbMismatch(float(self.delta_p[0]) / 2.0, float(self.delta_n[0]) / 2.0)


@dataclass(frozen=True)
class MsbMismatch:
    """Normalized MSB shifts: m1 for the positive half, m2 for the negative."""

    m1: float
    m2: float

    def __post_init__(self):
        if not (np.isfinite(self.m1) and np.isfinite(self.m2)):
            raise ValueError("m1 and m2 must be finite")


@dataclass(frozen=True)
class CellTable:
    """Realized transfer function as ordered half-open cells [lower, upper).

    Cells partition the real line (first lower bound -inf, last upper
    bound +inf, consecutive bounds coincide); each cell maps to one
    mid-rise output level.  Thresholds belong to the upper cell.
    """

    lower: np.ndarray
    upper: np.ndarray
    level: np.ndarray
    bits: int = field(default=0)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        lv = np.asarray(self.level, dtype=float)
        if not (lo.ndim == hi.ndim == lv.ndim == 1) or not (lo.size == hi.size == lv.size):
            raise ValueError("lower, upper, level must be 1-d of equal length")
        if lo.size == 0:
            raise ValueError("cell table must be non-empty")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "level", lv)

    def validate(self) -> None:
        """Raise unless the table is a proper partition with valid levels."""
        lo, hi, lv = self.lower, self.upper, self.level
        if not np.isneginf(lo[0]) or not np.isposinf(hi[-1]):
            raise ValueError("cells must cover (-inf, +inf)")
        if np.any(lo >= hi):
            raise ValueError("cells must be non-empty intervals")
        if lo.size > 1 and not np.array_equal(hi[:-1], lo[1:]):
            raise ValueError("consecutive cell bounds must coincide")
        if self.bits:
            if lo.size > 2**self.bits:
                raise ValueError("more cells than output codes")
            spec = QuantizerSpec(self.bits)
            if not np.all(np.isin(lv, spec.levels())):
                raise ValueError("cell levels must be valid mid-rise levels")

    def evaluate(self, x):
        """Piecewise-constant lookup; thresholds resolve to the upper cell."""
        xa = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(xa)):
            raise ValueError("x must be finite")
        idx = np.searchsorted(self.upper, xa, side="right")
        out = self.level[np.minimum(idx, self.level.size - 1)]
        return float(out) if np.ndim(x) == 0 else out


def ideal_midrise_quantize(x, spec: QuantizerSpec):
    """Ideal mid-rise quantization with clipping beyond +-1.

    f(x) = delta * (floor(x/delta) + 1/2), clipped to +-(1 - delta/2).
    Bin edges round toward +inf, so f(0) = +delta/2.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite")
    d = spec.delta
    top = 1.0 - d / 2.0
    y = (np.floor(xa / d) + 0.5) * d
    out = np.clip(y, -top, top)
    return float(out) if np.ndim(x) == 0 else out


def sample_mismatch(
    spec: QuantizerSpec,
    sigma_m: float,
    mode: str = "all-capacitors",
    rng: np.random.Generator | None = None,
) -> MismatchRealization:
    """Draw one chip's capacitor deviations.

    The MSB shift m = delta_1/2 has std-dev ``sigma_m``, i.e. the MSB
    relative deviation is N(0, (2*sigma_m)^2).  Each halving of the
    capacitor grows the relative deviation by sqrt(2) (unit-capacitor
    area scaling), so delta_k ~ N(0, (2*sigma_m*2^((k-1)/2))^2) and the
    induced voltage-shift error of bit k has std sigma_m*2^((1-k)/2).

    ``mode='msb-only'`` zeroes bits k >= 2; ``mode='none'`` zeroes all.
    Entries <= -1 (negative capacitance) are redrawn; at realistic
    sigma_m this has vanishing probability.
    """
    if sigma_m < 0:
        raise ValueError("sigma_m must be >= 0")
    if mode not in MISMATCH_MODES:
        raise ValueError(f"mode must be one of {MISMATCH_MODES}")
    if rng is None:
        rng = np.random.default_rng()

    n_caps = spec.bits - 1
    k = np.arange(1, spec.bits)
    scale = 2.0 * sigma_m * 2.0 ** ((k - 1) / 2.0)
    dev = rng.standard_normal((2, n_caps)) * scale
    while np.any(dev <= -1):
        bad = dev <= -1
        dev[bad] = rng.standard_normal(int(bad.sum())) * np.broadcast_to(scale, dev.shape)[bad]
    if mode == "msb-only":
        dev[:, 1:] = 0.0
    elif mode == "none":
        dev[:, :] = 0.0
    return MismatchRealization(dev[0], dev[1], sigma_m=float(sigma_m))


def _sar_codes(x2: np.ndarray, bits: int, dp: np.ndarray, dn: np.ndarray) -> np.ndarray:
    """Vectorized binary search. x2: (M, S); dp, dn: (M, bits-1)."""
    r = np.array(x2, dtype=float, copy=True)
    code = np.zeros(r.shape, dtype=np.int64)
    for k in range(1, bits + 1):
        b = r >= 0  # comparator; tie -> 1
        code |= b.astype(np.int64) << (bits - k)
        if k < bits:
            step = 2.0 ** (-k)
            shift_p = (step * (1.0 + dp[:, k - 1]))[:, None]
            shift_n = (step * (1.0 + dn[:, k - 1]))[:, None]
            r = r - np.where(b, shift_p, -shift_n)
    return code


def sar_convert(x, spec: QuantizerSpec, realization: MismatchRealization):
    """Behavioral SAR conversion with capacitor mismatch.

    Runs the switching scheme: starting from residual r = x, bit k
    compares r against zero (tie resolves to 1) and, for k < N, subtracts
    2^-k*(1+delta_p[k]) after a 1 or adds 2^-k*(1+delta_n[k]) after a 0.
    Reconstruction uses ideal binary weights (the digital side does not
    know the mismatch), so the output is (2c+1)*2^-N - 1 for the unsigned
    code c.  Clipping is emergent through the all-ones/all-zeros codes.
    """
    if realization.bits != spec.bits:
        raise ValueError("realization length does not match quantizer resolution")
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite")
    flat = xa.reshape(1, -1)
    dp = realization.delta_p.reshape(1, -1)
    dn = realization.delta_n.reshape(1, -1)
    code = _sar_codes(flat, spec.bits, dp, dn)
    y = (2 * code + 1) * 2.0 ** (-spec.bits) - 1.0
    y = y.reshape(xa.shape)
    return float(y) if np.ndim(x) == 0 else y


def msb_model_eval(x, m: MsbMismatch):
    """Piecewise-linear clip model isolating the MSB shift.

    For x >= 0 with shift m1: a positive shift compresses [0, m1] onto 0
    (saddle) and extends the range, f(x) = clip(x - m1, 0, 1); a negative
    shift makes outputs in (0, |m1|) unreachable, f(x) = x - m1 for
    x <= 1 + m1 and 1 beyond.  For x < 0 the mirrored rule with m2
    applies: f(x) = -f_m2(-x).
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("x must be finite")

    def half(u: np.ndarray, shift: float) -> np.ndarray:
        # u >= 0
        if shift >= 0:
            return np.clip(u - shift, 0.0, 1.0)
        return np.where(u <= 1.0 + shift, u - shift, 1.0)

    mag = np.abs(xa)
    out = np.where(xa >= 0, half(mag, m.m1), -half(mag, m.m2))
    return float(out) if np.ndim(x) == 0 else out


def enumerate_tf_cells(spec: QuantizerSpec, realization: MismatchRealization) -> CellTable:
    """Exact piecewise-constant form of the realized SAR transfer function.

    Walks the depth-N decision tree: before decision k the residual is
    x + offset with unit slope, so each comparator decision is a
    threshold on x and each leaf is an interval carrying one output code.
    Empty leaves are the missing codes of a mismatched converter.
    Agrees pointwise with :func:`sar_convert` except within rounding
    distance of thresholds (thresholds belong to the upper cell).
    """
    if realization.bits != spec.bits:
        raise ValueError("realization length does not match quantizer resolution")
    bits = spec.bits
    dp, dn = realization.delta_p, realization.delta_n

    lo = np.array([-np.inf])
    hi = np.array([np.inf])
    off = np.array([0.0])
    code = np.array([0], dtype=np.int64)
    for k in range(1, bits + 1):
        thr = -off
        n = lo.size
        c_lo = np.empty(2 * n)
        c_hi = np.empty(2 * n)
        c_off = np.empty(2 * n)
        c_code = np.empty(2 * n, dtype=np.int64)
        # child order: below-threshold (bit 0) then at-or-above (bit 1)
        c_lo[0::2] = lo
        c_hi[0::2] = np.minimum(hi, thr)
        c_code[0::2] = 2 * code
        c_lo[1::2] = np.maximum(lo, thr)
        c_hi[1::2] = hi
        c_code[1::2] = 2 * code + 1
        if k < bits:
            step = 2.0 ** (-k)
            c_off[0::2] = off + step * (1.0 + dn[k - 1])
            c_off[1::2] = off - step * (1.0 + dp[k - 1])
        else:
            c_off[0::2] = off
            c_off[1::2] = off
        keep = c_lo < c_hi
        lo, hi, off, code = c_lo[keep], c_hi[keep], c_off[keep], c_code[keep]

    level = (2 * code + 1) * 2.0 ** (-bits) - 1.0
    # merge adjacent cells with equal level (defensive; codes are distinct)
    if level.size > 1:
        starts = np.concatenate([[True], level[1:] != level[:-1]])
        idx = np.flatnonzero(starts)
        lo = lo[idx]
        level = level[idx]
        hi = np.concatenate([lo[1:], [np.inf]])
    return CellTable(lo, hi, level, bits=bits)
