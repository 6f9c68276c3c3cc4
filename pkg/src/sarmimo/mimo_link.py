"""Quantized massive MU-MIMO uplink simulator.

Single-antenna users transmit 16-QAM up to a base station whose receive
chain quantizes the real and imaginary part of every antenna with its own
SAR converter (2B converters for B antennas), each carrying an
independent, per-trial-fixed capacitor-mismatch realization.  The
receiver applies an LMMSE equalizer with perfect channel knowledge and
no awareness of the mismatch.  Because mismatch is frozen per fabricated
chip, performance is reported as the 90%-quantile of the uncoded BER
across chip realizations.

The channel is i.i.d. Rayleigh with per-user power control uniform in dB
(a geometry-based model is out of scope; absolute BER values are
therefore qualitative while relative and monotone effects remain
meaningful).  A fixed channel matrix can be imported from CSV instead.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .numerics import empirical_quantile
from .quantizer import MISMATCH_MODES, QuantizerSpec, _sar_codes, sample_mismatch
from .seeding import derive_seed, generator_for

__all__ = [
    "MimoConfig",
    "ChannelRealization",
    "TrialOutcome",
    "BerCurves",
    "generate_channel",
    "load_channel_csv",
    "modulate_16qam",
    "demodulate_16qam",
    "lmmse_detect",
    "calibrate_noise",
    "run_trial",
    "ber_quantile_curves",
    "ber_cdf",
]

# Gray-coded 4-PAM per dimension: bit pair (b0,b1) indexed as 2*b0+b1
# maps 00->-3, 01->-1, 11->+1, 10->+3; scaled for unit symbol energy.
_PAM_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0]) / math.sqrt(10.0)
_PAM_THRESHOLD = 2.0 / math.sqrt(10.0)


@dataclass(frozen=True)
class ChannelRealization:
    """Effective channel matrix (power control included) with cached norm."""

    H: np.ndarray
    frobenius_sq: float

    @classmethod
    def from_matrix(cls, H: np.ndarray) -> "ChannelRealization":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.size == 0:
            raise ValueError("H must be a non-empty 2-d matrix")
        return cls(H, float(np.sum(np.abs(H) ** 2)))

    def validate(self) -> None:
        fro = float(np.sum(np.abs(self.H) ** 2))
        if not (self.frobenius_sq > 0):
            raise ValueError("frobenius_sq must be > 0")
        if abs(fro - self.frobenius_sq) > 1e-9 * fro:
            raise ValueError("cached frobenius_sq is stale")


@dataclass(frozen=True)
class MimoConfig:
    """Uplink experiment description; defaults give 160k bits/trial/SNR point."""

    antennas: int = 64
    users: int = 16
    spec: QuantizerSpec = QuantizerSpec(4)
    sigma_m: float = 0.0
    mismatch_mode: str = "all-capacitors"
    snr_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 100
    frames_per_trial: int = 25
    symbols_per_frame: int = 100
    agc_sigma_x: float = 0.35
    power_control_db: float = 3.0
    channel_source: str = "iid-rayleigh"
    es: float = 1.0
    master_seed: int = 1
    quantizer_enabled: bool = True  # False = identity front end (reference)

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        if self.antennas < self.users or self.users < 1:
            raise ValueError("need antennas >= users >= 1")
        if self.sigma_m < 0:
            raise ValueError("sigma_m must be >= 0")
        if self.mismatch_mode not in MISMATCH_MODES:
            raise ValueError(f"mismatch_mode must be one of {MISMATCH_MODES}")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must be non-empty")
        if min(self.trials, self.frames_per_trial, self.symbols_per_frame) < 1:
            raise ValueError("trials, frames and symbols must be >= 1")
        if self.agc_sigma_x <= 0 or self.es <= 0:
            raise ValueError("agc_sigma_x and es must be > 0")
        if self.power_control_db < 0:
            raise ValueError("power_control_db must be >= 0")
        if self.channel_source != "iid-rayleigh" and not self.channel_source.startswith("file:"):
            raise ValueError("channel_source must be 'iid-rayleigh' or 'file:<path>'")

    @property
    def bits_per_trial_per_snr(self) -> int:
        return 4 * self.users * self.frames_per_trial * self.symbols_per_frame


@dataclass(frozen=True)
class TrialOutcome:
    """BER per SNR point for one chip realization."""

    trial_index: int
    ber: np.ndarray
    total_bits: int
    chip_seed: int


@dataclass(frozen=True)
class BerCurves:
    """Quantile and mean BER versus SNR across chip realizations."""

    snr_db: np.ndarray
    quantile_ber: np.ndarray
    mean_ber: np.ndarray
    total_bits: int
    trials: int
    quantile: float

    def rows(self):
        for i in range(self.snr_db.size):
            yield (
                float(self.snr_db[i]),
                float(self.quantile_ber[i]),
                float(self.mean_ber[i]),
                self.total_bits,
                self.trials,
            )


def generate_channel(
    B: int, U: int, power_control_db: float, rng: np.random.Generator
) -> ChannelRealization:
    """i.i.d. Rayleigh channel with per-user power control.

    Entries are circularly-symmetric complex Gaussian; every column is
    normalized to unit mean-square entry and then scaled by a per-user
    power gain 10^(x/10) with x uniform on [-p, +p] dB.
    """
    if B < 1 or U < 1:
        raise ValueError("need B >= 1 and U >= 1")
    a = rng.standard_normal((2, B, U))
    H = (a[0] + 1j * a[1]) / math.sqrt(2.0)
    H = H / np.sqrt(np.mean(np.abs(H) ** 2, axis=0, keepdims=True))
    gains_db = rng.uniform(-power_control_db, power_control_db, U)
    H = H * np.sqrt(10.0 ** (gains_db / 10.0))
    return ChannelRealization.from_matrix(H)


def load_channel_csv(path: str) -> ChannelRealization:
    """Read an effective channel matrix from CSV with header row,col,re,im."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"row", "col", "re", "im"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError("channel CSV must have header row,col,re,im")
        for rec in reader:
            entries[(int(rec["row"]), int(rec["col"]))] = complex(
                float(rec["re"]), float(rec["im"])
            )
    if not entries:
        raise ValueError("channel CSV contains no entries")
    rows = 1 + max(k[0] for k in entries)
    cols = 1 + max(k[1] for k in entries)
    if len(entries) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(entries)}")
    H = np.empty((rows, cols), dtype=complex)
    for (r, c), v in entries.items():
        H[r, c] = v
    return ChannelRealization.from_matrix(H)


def modulate_16qam(bits) -> np.ndarray:
    """Gray-mapped 16-QAM with unit average energy.

    Groups of four bits map to one symbol: the first two bits select the
    real level, the last two the imaginary level, per dimension
    00->-3, 01->-1, 11->+1, 10->+3, scaled by 1/sqrt(10).
    """
    b = np.asarray(bits, dtype=np.int64).ravel()
    if b.size % 4:
        raise ValueError("bit count must be divisible by 4")
    quads = b.reshape(-1, 4)
    re = _PAM_LEVELS[2 * quads[:, 0] + quads[:, 1]]
    im = _PAM_LEVELS[2 * quads[:, 2] + quads[:, 3]]
    return re + 1j * im


def demodulate_16qam(symbols) -> np.ndarray:
    """Hard-decision 16-QAM demapping, inverse of :func:`modulate_16qam`.

    Per dimension the decision thresholds sit at 0 and +-2/sqrt(10);
    a value exactly on a threshold rounds toward +inf.
    """
    s = np.asarray(symbols, dtype=complex).ravel()
    if not np.all(np.isfinite(s)):
        raise ValueError("symbols must be finite")
    out = np.empty((s.size, 4), dtype=np.int64)
    for offset, x in ((0, s.real), (2, s.imag)):
        out[:, offset] = x >= 0
        out[:, offset + 1] = (x >= -_PAM_THRESHOLD) & (x < _PAM_THRESHOLD)
    return out.ravel()


def lmmse_detect(channel: ChannelRealization, r, n0: float, es: float = 1.0) -> np.ndarray:
    """LMMSE estimate s_hat = (H^H H + (n0/es) I)^-1 H^H r.

    ``r`` may be one receive vector (B,) or a matrix of vectors (B, S);
    the Hermitian positive-definite system is solved directly.
    """
    if n0 <= 0:
        raise ValueError("n0 must be > 0")
    if es <= 0:
        raise ValueError("es must be > 0")
    H = channel.H
    r_arr = np.asarray(r, dtype=complex)
    if not np.all(np.isfinite(r_arr)):
        raise ValueError("receive vector must be finite")
    Hh = H.conj().T
    A = Hh @ H + (n0 / es) * np.eye(H.shape[1])
    return linalg.solve(A, Hh @ r_arr, assume_a="pos")


def calibrate_noise(channel: ChannelRealization, es: float, snr: float) -> float:
    """Noise variance hitting a target average receive SNR.

    SNR is defined as ||H||_F^2 * Es / (B * N0), so
    n0 = ||H||_F^2 * es / (B * snr).
    """
    if snr <= 0:
        raise ValueError("snr must be > 0")
    B = channel.H.shape[0]
    return channel.frobenius_sq * es / (B * snr)


def _fixed_channel(config: MimoConfig) -> ChannelRealization | None:
    if config.channel_source.startswith("file:"):
        return load_channel_csv(config.channel_source[len("file:"):])
    return None


def run_trial(config: MimoConfig, trial_index: int) -> TrialOutcome:
    """Simulate one fabricated receiver across all frames and SNR points.

    Per trial: (1) draw 2B mismatch realizations (one SAR converter per
    real dimension: rows 0..B-1 real parts, B..2B-1 imaginary parts),
    fixed for the whole trial; (2) per frame draw a channel; per SNR
    point calibrate the noise, draw payload bits and noise, form
    z = H s + n, scale by the AGC gain g = agc_sigma_x /
    sqrt((||H||_F^2 es / B + n0) / 2), quantize each real dimension with
    its own converter, and detect with LMMSE on y/g; (3) count bit
    errors.

    The per-trial generator is derived from (master_seed, trial_index);
    within a trial the draw order is chips, then per frame the channel,
    then per SNR point bits followed by noise.
    """
    rng = generator_for(config.master_seed, trial_index)
    chip_seed = derive_seed(config.master_seed, trial_index)
    B, U = config.antennas, config.users
    bits_n = config.spec.bits
    S = config.symbols_per_frame
    snr_lin = 10.0 ** (np.asarray(config.snr_grid_db) / 10.0)

    chips = [
        sample_mismatch(config.spec, config.sigma_m, config.mismatch_mode, rng)
        for _ in range(2 * B)
    ]
    dp = np.stack([c.delta_p for c in chips])
    dn = np.stack([c.delta_n for c in chips])

    fixed = _fixed_channel(config)
    amp = math.sqrt(config.es)
    errors = np.zeros(len(snr_lin), dtype=np.int64)
    for _frame in range(config.frames_per_trial):
        channel = fixed if fixed is not None else generate_channel(
            B, U, config.power_control_db, rng
        )
        H = channel.H
        for j, snr in enumerate(snr_lin):
            n0 = calibrate_noise(channel, config.es, float(snr))
            payload = rng.integers(0, 2, size=(U, S, 4))
            s = modulate_16qam(payload).reshape(U, S) * amp
            noise = (
                rng.standard_normal((B, S)) + 1j * rng.standard_normal((B, S))
            ) * math.sqrt(n0 / 2.0)
            z = H @ s + noise
            g = config.agc_sigma_x / math.sqrt(
                (channel.frobenius_sq * config.es / B + n0) / 2.0
            )
            zg = g * z
            if config.quantizer_enabled:
                x2 = np.concatenate([zg.real, zg.imag], axis=0)
                codes = _sar_codes(x2, bits_n, dp, dn)
                y2 = (2 * codes + 1) * 2.0 ** (-bits_n) - 1.0
                y = y2[:B] + 1j * y2[B:]
            else:
                y = zg
            s_hat = lmmse_detect(channel, y / g, n0, config.es)
            detected = demodulate_16qam(s_hat.ravel()).reshape(U, S, 4)
            errors[j] += int(np.sum(detected != payload))
    total = config.bits_per_trial_per_snr
    return TrialOutcome(trial_index, errors / total, total, chip_seed)


def _run_all_trials(config: MimoConfig, threads: int) -> np.ndarray:
    """(trials, n_snr) BER matrix, deterministic for any thread count."""
    idx = list(range(config.trials))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda t: run_trial(config, t), idx))
    else:
        outcomes = [run_trial(config, t) for t in idx]
    return np.stack([o.ber for o in outcomes])


def ber_quantile_curves(
    config: MimoConfig, quantile: float = 0.90, threads: int = 1
) -> BerCurves:
    """Quantile and mean BER versus SNR across independent chip trials.

    The default 0.90 quantile is the 10% worst-case chip: 90% of
    fabricated receivers achieve a BER at or below the reported curve.
    """
    bers = _run_all_trials(config, threads)
    quant = np.array(
        [empirical_quantile(bers[:, j], quantile) for j in range(bers.shape[1])]
    )
    mean = bers.mean(axis=0)
    return BerCurves(
        np.asarray(config.snr_grid_db),
        quant,
        mean,
        config.bits_per_trial_per_snr,
        config.trials,
        quantile,
    )


def ber_cdf(config: MimoConfig, snr_db: float, threads: int = 1) -> np.ndarray:
    """Empirical CDF of per-chip BER at one SNR point of the grid.

    Returns rows (ber, cumulative_fraction) with fractions k/trials for
    the sorted trial BERs.  ``snr_db`` must be a point of
    ``config.snr_grid_db`` so the values agree with
    :func:`ber_quantile_curves` for the same seed.
    """
    grid = np.asarray(config.snr_grid_db)
    matches = np.flatnonzero(np.isclose(grid, snr_db, rtol=0, atol=1e-9))
    if matches.size == 0:
        raise ValueError(f"snr_db={snr_db} is not on the configured SNR grid")
    j = int(matches[0])
    bers = _run_all_trials(config, threads)
    sorted_ber = np.sort(bers[:, j])
    frac = np.arange(1, sorted_ber.size + 1) / sorted_ber.size
    return np.column_stack([sorted_ber, frac])


def unquantized_reference(config: MimoConfig) -> MimoConfig:
    """The same experiment with an identity front end (no quantization)."""
    return replace(config, quantizer_enabled=False)
