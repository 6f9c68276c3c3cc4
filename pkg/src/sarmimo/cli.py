"""Reproducible experiment runner.

Every subcommand resolves its configuration (defaults < config file <
command-line flags), echoes it, writes one CSV plus a manifest
``<out>.manifest`` holding the fully resolved configuration.  Re-running
a subcommand with ``--config <manifest>`` reproduces the CSV
byte-identically, for any ``--threads`` value.

Config files and manifests are flat ``key = value`` text; ``#`` starts a
comment.  Grids are written ``start:stop:count`` (linear),
``log:start:stop:count`` (log-spaced) or as comma lists.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .bussgang import (
    cells_bussgang,
    ideal_gain,
    ideal_second_moment,
    make_report,
    msb_efr,
    msb_gain,
    msb_second_moment,
    peak_efr,
)
from .mimo_link import MimoConfig, ber_cdf, ber_quantile_curves
from .numerics import quadrature_expectation
from .quantizer import (
    MismatchRealization,
    MsbMismatch,
    QuantizerSpec,
    enumerate_tf_cells,
    ideal_midrise_quantize,
    msb_model_eval,
    sample_mismatch,
    sar_convert,
)
from .seeding import generator_for
from .yield_mc import YieldSweepConfig, efr_quantile_surface

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


# --------------------------------------------------------------------------
# value parsing and formatting


def parse_grid(text: str) -> list[float]:
    """``start:stop:count``, ``log:start:stop:count`` or ``a,b,c``."""
    text = text.strip()
    log = text.startswith("log:")
    if log:
        text = text[4:]
    parts = text.split(":")
    if len(parts) == 3:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ConfigError("grid count must be >= 1")
        if log:
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid endpoints must be > 0")
            return list(np.geomspace(start, stop, count))
        return list(np.linspace(start, stop, count))
    if log:
        raise ConfigError("log grids need start:stop:count")
    return [float(v) for v in text.split(",")]


def parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(str(v) if isinstance(v, (int, str)) else _fmt(v) for v in row)
                + "\n"
            )


def read_kv_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                out[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


def write_manifest(path: str, subcommand: str, resolved: dict[str, str]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"subcommand = {subcommand}\n")
        fh.write(f"version = {__version__}\n")
        for key in sorted(resolved):
            fh.write(f"{key} = {resolved[key]}\n")


# --------------------------------------------------------------------------
# option resolution

# per-subcommand option table: name -> (default, help)
_COMMON = {
    "seed": ("1", "master seed (u64)"),
    "out": (None, "output CSV path (required)"),
    "threads": ("1", "worker pool size for trial-parallel subcommands"),
}

_OPTIONS: dict[str, dict[str, tuple[str | None, str]]] = {
    "efr-ideal": {
        "bits": ("4", "quantizer resolution N"),
        "sigma-grid": ("log:0.02:3:200", "input std-dev grid"),
    },
    "tf-dump": {
        "model": ("sar", "transfer function: ideal | sar | msb"),
        "bits": ("5", "quantizer resolution N (ideal/sar)"),
        "m1": ("0.125", "MSB shift, positive half (msb model)"),
        "m2": ("-0.125", "MSB shift, negative half (msb model)"),
        "delta-p": (None, "comma list of positive-CDAC deviations (sar)"),
        "delta-n": (None, "comma list of negative-CDAC deviations (sar)"),
        "sigma-m": ("0", "sample a chip with this mismatch std (sar)"),
        "mode": ("all-capacitors", "mismatch mode for sampled chips"),
        "x-grid": ("-1.5:1.5:601", "input grid"),
    },
    "efr-msb-model": {
        "m1": ("0.125", "MSB shift, positive half"),
        "m2": ("-0.125", "MSB shift, negative half"),
        "sigma-grid": ("log:0.02:3:200", "input std-dev grid"),
    },
    "peak-efr": {
        "m-grid": ("0.0125,0.025,0.05,0.1", "mismatch magnitudes"),
        "m1-sign": ("1", "sign applied to m1 (+1 or -1)"),
        "m2-sign": ("-1", "sign applied to m2 (+1 or -1)"),
    },
    "efr-yield": {
        "bits": ("4", "quantizer resolution N"),
        "sigma-m-grid": ("0,0.003125,0.00625,0.0125,0.025,0.05", "mismatch std grid"),
        "sigma-x-grid": ("log:0.05:1.5:64", "input std-dev grid"),
        "trials": ("500", "chips per sigma_m"),
        "quantile": ("0.1", "lower quantile across chips"),
        "mode": ("all-capacitors", "mismatch mode"),
        "method": ("exact-cells", "exact-cells | monte-carlo"),
        "mc-samples": ("1000000", "samples per chip for monte-carlo method"),
    },
    "mimo-ber": {
        "antennas": ("64", "base-station antennas B"),
        "users": ("16", "single-antenna users U"),
        "bits": ("4", "ADC resolution N"),
        "sigma-m": ("0", "mismatch std"),
        "mode": ("all-capacitors", "mismatch mode"),
        "snr-grid-db": ("0:30:7", "receive SNR grid in dB"),
        "trials": ("100", "chip realizations"),
        "frames": ("25", "channel redraws per trial"),
        "symbols": ("100", "channel uses per frame"),
        "agc-sigma-x": ("0.35", "target per-dimension std at the ADC input"),
        "power-control-db": ("3", "per-user power control half-range"),
        "channel": ("iid-rayleigh", "iid-rayleigh | file:<path>"),
        "es": ("1", "average symbol energy"),
        "quantile": ("0.9", "BER quantile across chips"),
        "quantizer": ("on", "on | off (off = unquantized reference)"),
    },
    "mimo-cdf": {
        "antennas": ("64", "base-station antennas B"),
        "users": ("16", "single-antenna users U"),
        "bits": ("4", "ADC resolution N"),
        "sigma-m": ("0", "mismatch std"),
        "mode": ("all-capacitors", "mismatch mode"),
        "snr-grid-db": ("15", "receive SNR grid in dB"),
        "snr-db": ("15", "grid point at which to report the CDF"),
        "trials": ("100", "chip realizations"),
        "frames": ("25", "channel redraws per trial"),
        "symbols": ("100", "channel uses per frame"),
        "agc-sigma-x": ("0.35", "target per-dimension std at the ADC input"),
        "power-control-db": ("3", "per-user power control half-range"),
        "channel": ("iid-rayleigh", "iid-rayleigh | file:<path>"),
        "es": ("1", "average symbol energy"),
        "quantizer": ("on", "on | off"),
    },
    "selftest": {},
}


def resolve_options(subcommand: str, args: argparse.Namespace) -> dict[str, str]:
    """defaults < config file < explicit flags; returns string-valued map."""
    table = dict(_COMMON)
    table.update(_OPTIONS[subcommand])
    resolved = {k: v[0] for k, v in table.items() if v[0] is not None}

    if args.config:
        file_kv = read_kv_file(args.config)
        file_sub = file_kv.pop("subcommand", None)
        file_kv.pop("version", None)
        if file_sub is not None and file_sub != subcommand:
            raise ConfigError(
                f"config file is a manifest for '{file_sub}', not '{subcommand}'"
            )
        for key, value in file_kv.items():
            if key not in table:
                raise ConfigError(f"unknown config key '{key}' for {subcommand}")
            resolved[key] = value

    for key in table:
        cli_value = getattr(args, key.replace("-", "_"), None)
        if cli_value is not None:
            resolved[key] = cli_value

    if "out" not in resolved:
        raise ConfigError("--out is required")
    return resolved


def _as_int(resolved: dict[str, str], key: str) -> int:
    try:
        return int(resolved[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {resolved[key]!r}") from exc


def _as_float(resolved: dict[str, str], key: str) -> float:
    try:
        return float(resolved[key])
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {resolved[key]!r}") from exc


def echo_config(subcommand: str, resolved: dict[str, str]) -> None:
    print(f"[sarmimo {__version__}] {subcommand}")
    for key in sorted(resolved):
        print(f"  {key} = {resolved[key]}")


# --------------------------------------------------------------------------
# subcommand bodies


def _sweep_rows(gain_fn, second_fn, sigma_grid):
    for sigma in sigma_grid:
        rep = make_report(gain_fn(sigma), second_fn(sigma), sigma)
        yield (
            sigma,
            rep.beta,
            rep.second_moment,
            rep.distortion_power,
            rep.sdr_db,
            rep.efr,
        )


_SWEEP_HEADER = ["sigma_x", "beta", "second_moment", "distortion", "sdr_db", "efr"]


def cmd_efr_ideal(resolved: dict[str, str]) -> None:
    spec = QuantizerSpec(_as_int(resolved, "bits"))
    grid = parse_grid(resolved["sigma-grid"])
    rows = _sweep_rows(
        lambda s: ideal_gain(spec, s), lambda s: ideal_second_moment(spec, s), grid
    )
    write_csv(resolved["out"], _SWEEP_HEADER, rows)


def cmd_efr_msb_model(resolved: dict[str, str]) -> None:
    m = MsbMismatch(_as_float(resolved, "m1"), _as_float(resolved, "m2"))
    grid = parse_grid(resolved["sigma-grid"])
    rows = _sweep_rows(lambda s: msb_gain(m, s), lambda s: msb_second_moment(m, s), grid)
    write_csv(resolved["out"], _SWEEP_HEADER, rows)


def cmd_tf_dump(resolved: dict[str, str]) -> None:
    model = resolved["model"]
    xs = parse_grid(resolved["x-grid"])
    if model == "ideal":
        spec = QuantizerSpec(_as_int(resolved, "bits"))
        ys = [ideal_midrise_quantize(x, spec) for x in xs]
    elif model == "msb":
        m = MsbMismatch(_as_float(resolved, "m1"), _as_float(resolved, "m2"))
        ys = [msb_model_eval(x, m) for x in xs]
    elif model == "sar":
        spec = QuantizerSpec(_as_int(resolved, "bits"))
        if "delta-p" in resolved or "delta-n" in resolved:
            if not ("delta-p" in resolved and "delta-n" in resolved):
                raise ConfigError("give both delta-p and delta-n or neither")
            chip = MismatchRealization(
                np.asarray(parse_floats(resolved["delta-p"])),
                np.asarray(parse_floats(resolved["delta-n"])),
            )
        else:
            rng = generator_for(_as_int(resolved, "seed"), 0)
            chip = sample_mismatch(
                spec, _as_float(resolved, "sigma-m"), resolved["mode"], rng
            )
        ys = [sar_convert(x, spec, chip) for x in xs]
    else:
        raise ConfigError(f"unknown model '{model}'")
    write_csv(resolved["out"], ["x", "y"], zip(xs, ys))


def cmd_peak_efr(resolved: dict[str, str]) -> None:
    m_grid = parse_floats(resolved["m-grid"])
    s1 = _as_float(resolved, "m1-sign")
    s2 = _as_float(resolved, "m2-sign")
    if abs(s1) != 1 or abs(s2) != 1:
        raise ConfigError("m1-sign and m2-sign must be +1 or -1")
    rows = []
    for m in m_grid:
        mm = MsbMismatch(s1 * m, s2 * m)
        sigma_star, efr_star = peak_efr(lambda s: msb_efr(mm, s))
        rows.append((m, sigma_star, efr_star))
    write_csv(resolved["out"], ["m", "sigma_star", "efr_star"], rows)


def cmd_efr_yield(resolved: dict[str, str], threads: int) -> None:
    config = YieldSweepConfig(
        spec=QuantizerSpec(_as_int(resolved, "bits")),
        sigma_m_grid=tuple(parse_grid(resolved["sigma-m-grid"])),
        sigma_x_grid=tuple(parse_grid(resolved["sigma-x-grid"])),
        trials=_as_int(resolved, "trials"),
        quantile=_as_float(resolved, "quantile"),
        mode=resolved["mode"],
        method=resolved["method"],
        mc_samples=_as_int(resolved, "mc-samples"),
        master_seed=_as_int(resolved, "seed"),
    )
    surface = efr_quantile_surface(config, threads=threads)
    write_csv(
        resolved["out"],
        ["sigma_m", "sigma_x", "quantile_efr", "mean_efr", "trials"],
        surface.rows(),
    )


def _mimo_config(resolved: dict[str, str]) -> MimoConfig:
    quantizer = resolved.get("quantizer", "on")
    if quantizer not in ("on", "off"):
        raise ConfigError("quantizer must be 'on' or 'off'")
    return MimoConfig(
        antennas=_as_int(resolved, "antennas"),
        users=_as_int(resolved, "users"),
        spec=QuantizerSpec(_as_int(resolved, "bits")),
        sigma_m=_as_float(resolved, "sigma-m"),
        mismatch_mode=resolved["mode"],
        snr_grid_db=tuple(parse_grid(resolved["snr-grid-db"])),
        trials=_as_int(resolved, "trials"),
        frames_per_trial=_as_int(resolved, "frames"),
        symbols_per_frame=_as_int(resolved, "symbols"),
        agc_sigma_x=_as_float(resolved, "agc-sigma-x"),
        power_control_db=_as_float(resolved, "power-control-db"),
        channel_source=resolved["channel"],
        es=_as_float(resolved, "es"),
        master_seed=_as_int(resolved, "seed"),
        quantizer_enabled=quantizer == "on",
    )


def cmd_mimo_ber(resolved: dict[str, str], threads: int) -> None:
    curves = ber_quantile_curves(
        _mimo_config(resolved), quantile=_as_float(resolved, "quantile"), threads=threads
    )
    write_csv(
        resolved["out"],
        ["snr_db", "quantile_ber", "mean_ber", "total_bits", "trials"],
        curves.rows(),
    )


def cmd_mimo_cdf(resolved: dict[str, str], threads: int) -> None:
    table = ber_cdf(_mimo_config(resolved), _as_float(resolved, "snr-db"), threads=threads)
    write_csv(resolved["out"], ["ber", "cum_fraction"], table)


def _selftest_checks():
    spec4 = QuantizerSpec(4)
    edges4 = list(np.arange(-(2**3), 2**3 + 1) * spec4.delta)

    beta_oracle = quadrature_expectation(
        lambda x: x * ideal_midrise_quantize(x, spec4), 0.35, edges4
    ) / 0.35**2
    yield ("ideal_gain_vs_quadrature", ideal_gain(spec4, 0.35), beta_oracle, 1e-8)

    sm_oracle = quadrature_expectation(
        lambda x: ideal_midrise_quantize(x, spec4) ** 2, 0.35, edges4
    )
    yield ("ideal_second_moment_vs_quadrature", ideal_second_moment(spec4, 0.35), sm_oracle, 1e-8)

    m = MsbMismatch(0.125, -0.125)
    bps = sorted({-1 - m.m2, -max(m.m2, 0.0), 0.0, max(m.m1, 0.0), 1 + m.m1})
    gain_oracle = quadrature_expectation(
        lambda x: x * msb_model_eval(x, m), 0.5, bps
    ) / 0.5**2
    yield ("msb_gain_vs_quadrature", msb_gain(m, 0.5), gain_oracle, 1e-8)

    msm_oracle = quadrature_expectation(lambda x: msb_model_eval(x, m) ** 2, 0.5, bps)
    yield ("msb_second_moment_vs_quadrature", msb_second_moment(m, 0.5), msm_oracle, 1e-8)

    spec1 = QuantizerSpec(1)
    for sigma in (0.25, 1.0, 4.0):
        rep = make_report(ideal_gain(spec1, sigma), ideal_second_moment(spec1, sigma), sigma)
        yield (f"one_bit_efr_sigma_{sigma}", rep.efr, 1.0, 1e-3)

    from .numerics import q_function

    yield (
        "clipping_limit_n16",
        ideal_gain(QuantizerSpec(16), 0.5),
        1.0 - 2.0 * q_function(2.0),
        1e-4,
    )

    zero = MismatchRealization(np.zeros(3), np.zeros(3))
    cells = enumerate_tf_cells(spec4, zero)
    rep = cells_bussgang(cells, 0.35)
    yield ("cells_vs_closed_form_gain", rep.beta, ideal_gain(spec4, 0.35), 1e-12)
    yield (
        "cells_vs_closed_form_second_moment",
        rep.second_moment,
        ideal_second_moment(spec4, 0.35),
        1e-12,
    )

    rng = generator_for(0xBEEF, 0)
    xs = rng.uniform(-1.2, 1.2, 10_000)
    agree = float(
        np.max(np.abs(sar_convert(xs, spec4, zero) - ideal_midrise_quantize(xs, spec4)))
    )
    yield ("sar_equals_ideal_zero_mismatch", agree, 0.0, 0.0)


def cmd_selftest(resolved: dict[str, str]) -> int:
    failures = 0
    rows = []
    for name, measured, reference, tol in _selftest_checks():
        ok = abs(measured - reference) <= tol
        status = "pass" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"  [{status}] {name}: measured={measured!r} reference={reference!r} tol={tol}")
        rows.append((name, measured, reference, tol, status))
    write_csv(
        resolved["out"], ["check", "measured", "reference", "tolerance", "status"], rows
    )
    print(f"selftest: {len(rows) - failures}/{len(rows)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarmimo",
        description="SAR-ADC mismatch and quantized MU-MIMO experiment runner",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, options in _OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key = value config file or manifest")
        for opt, (default, help_text) in {**_COMMON, **options}.items():
            shown = f"{help_text} (default: {default})" if default is not None else help_text
            p.add_argument(f"--{opt}", default=None, help=shown)
    return parser


def run_experiment(argv: list[str]) -> int:
    """Dispatch one subcommand; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = args.subcommand
    try:
        resolved = resolve_options(sub, args)
        threads = _as_int(resolved, "threads")
        if threads < 1:
            raise ConfigError("threads must be >= 1")
        echo_config(sub, resolved)

        status = EXIT_OK
        if sub == "efr-ideal":
            cmd_efr_ideal(resolved)
        elif sub == "tf-dump":
            cmd_tf_dump(resolved)
        elif sub == "efr-msb-model":
            cmd_efr_msb_model(resolved)
        elif sub == "peak-efr":
            cmd_peak_efr(resolved)
        elif sub == "efr-yield":
            cmd_efr_yield(resolved, threads)
        elif sub == "mimo-ber":
            cmd_mimo_ber(resolved, threads)
        elif sub == "mimo-cdf":
            cmd_mimo_cdf(resolved, threads)
        elif sub == "selftest":
            status = cmd_selftest(resolved)
        write_manifest(resolved["out"] + ".manifest", sub, resolved)
        print(f"wrote {resolved['out']} and {resolved['out']}.manifest")
        return status
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_experiment(sys.argv[1:]))


if __name__ == "__main__":
    main()
