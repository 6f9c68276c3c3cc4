"""Closed-form gains and moments against the quadrature oracle; EFR metrics."""

import math

import numpy as np
import pytest
from helpers import cell_breakpoints, msb_model_breakpoints, staircase_breakpoints

from sarmimo.bussgang import (
    DB_PER_BIT,
    EFR_OFFSET_DB,
    cells_bussgang,
    empirical_bussgang,
    ideal_efr,
    ideal_gain,
    ideal_second_moment,
    make_report,
    msb_efr,
    msb_gain,
    msb_second_moment,
    peak_efr,
)
from sarmimo.numerics import q_function, quadrature_expectation
from sarmimo.quantizer import (
    CellTable,
    MismatchRealization,
    MsbMismatch,
    QuantizerSpec,
    enumerate_tf_cells,
    ideal_midrise_quantize,
    msb_model_eval,
    sample_mismatch,
    sar_convert,
)

PHI_0 = 0.39894228040143268
ONE_MINUS_2Q1 = 0.6826894921370859
ONE_MINUS_2Q2 = 0.95449973610364159


def gain_oracle(tf, sigma, breakpoints):
    """Correlation-form Bussgang gain E[X f(X)] / sigma^2 by quadrature."""
    return quadrature_expectation(lambda x: x * tf(x), sigma, breakpoints) / sigma**2


def second_moment_oracle(tf, sigma, breakpoints):
    return quadrature_expectation(lambda x: tf(x) ** 2, sigma, breakpoints)


class TestIdealGain:
    def test_one_bit_is_phi0_over_sigma(self):
        assert ideal_gain(QuantizerSpec(1), 1.0) == pytest.approx(PHI_0, abs=1e-15)

    def test_high_resolution_approaches_clipping_limit(self):
        assert ideal_gain(QuantizerSpec(16), 0.5) == pytest.approx(ONE_MINUS_2Q2, abs=1e-4)

    def test_against_quadrature(self):
        spec = QuantizerSpec(4)
        oracle = gain_oracle(
            lambda x: ideal_midrise_quantize(x, spec), 0.35, staircase_breakpoints(spec)
        )
        assert ideal_gain(spec, 0.35) == pytest.approx(oracle, abs=1e-9)

    def test_limit_monotone_in_resolution(self):
        gains = [ideal_gain(QuantizerSpec(n), 0.5) for n in range(2, 17)]
        assert all(a < b for a, b in zip(gains, gains[1:]))
        assert gains[-1] < ONE_MINUS_2Q2

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            ideal_gain(QuantizerSpec(4), 0.0)


class TestIdealSecondMoment:
    def test_one_bit_quarter(self):
        for sigma in (0.1, 1.0, 7.0):
            assert ideal_second_moment(QuantizerSpec(1), sigma) == pytest.approx(0.25, abs=1e-15)

    def test_large_sigma_approaches_top_level_squared(self):
        spec = QuantizerSpec(4)
        top = (1 - spec.delta / 2) ** 2
        assert ideal_second_moment(spec, 100.0) == pytest.approx(top, rel=1e-2)

    def test_against_quadrature(self):
        spec = QuantizerSpec(4)
        oracle = second_moment_oracle(
            lambda x: ideal_midrise_quantize(x, spec), 0.35, staircase_breakpoints(spec)
        )
        assert ideal_second_moment(spec, 0.35) == pytest.approx(oracle, abs=1e-9)


class TestMsbGain:
    def test_zero_mismatch_is_clipping_gain(self):
        assert msb_gain(MsbMismatch(0, 0), 1.0) == pytest.approx(ONE_MINUS_2Q1, abs=1e-15)

    def test_mixed_signs_against_quadrature(self):
        m = MsbMismatch(0.125, -0.125)
        oracle = gain_oracle(
            lambda x: msb_model_eval(x, m), 0.5, msb_model_breakpoints(m)
        )
        assert msb_gain(m, 0.5) == pytest.approx(oracle, abs=1e-9)

    def test_case_boundary_continuity(self):
        for sigma in (0.2, 0.5, 1.0):
            for eps in (1e-6, 1e-9):
                above = msb_gain(MsbMismatch(eps, eps), sigma)
                below = msb_gain(MsbMismatch(-eps, -eps), sigma)
                assert abs(above - below) < 1e-5


class TestMsbSecondMoment:
    def test_clip_only_against_quadrature(self):
        m = MsbMismatch(0.0, 0.0)
        oracle = second_moment_oracle(
            lambda x: np.clip(x, -1, 1), 1.0, [-1.0, 0.0, 1.0]
        )
        assert msb_second_moment(m, 1.0) == pytest.approx(oracle, abs=1e-9)

    def test_positive_pair_against_quadrature(self):
        m = MsbMismatch(0.125, 0.125)
        oracle = second_moment_oracle(
            lambda x: msb_model_eval(x, m), 0.4, msb_model_breakpoints(m)
        )
        assert msb_second_moment(m, 0.4) == pytest.approx(oracle, abs=1e-9)

    def test_half_line_assembly_is_symmetric(self):
        assert msb_second_moment(MsbMismatch(-0.1, 0.2), 0.6) == pytest.approx(
            msb_second_moment(MsbMismatch(0.2, -0.1), 0.6), abs=1e-15
        )


class TestMakeReport:
    def test_constants(self):
        assert EFR_OFFSET_DB == pytest.approx(3.5854, abs=1e-4)
        assert DB_PER_BIT == pytest.approx(6.0206, abs=1e-4)

    def test_one_bit_efr_is_exactly_one(self):
        spec = QuantizerSpec(1)
        for sigma in (0.25, 1.0, 4.0):
            rep = make_report(ideal_gain(spec, sigma), ideal_second_moment(spec, sigma), sigma)
            assert rep.efr == pytest.approx(1.0, abs=1e-6)

    def test_report_identities(self):
        spec = QuantizerSpec(4)
        rep = make_report(ideal_gain(spec, 0.4), ideal_second_moment(spec, 0.4), 0.4)
        assert rep.distortion_power == pytest.approx(
            rep.second_moment - rep.beta**2 * 0.16, abs=1e-15
        )
        assert rep.sdr == pytest.approx(rep.beta**2 * 0.16 / rep.distortion_power)
        assert rep.efr == pytest.approx((rep.sdr_db + EFR_OFFSET_DB) / DB_PER_BIT)
        assert rep.distortion_power >= 0

    def test_zero_distortion_sentinel(self):
        rep = make_report(0.5, 0.25 * 0.7**2, 0.7)
        assert math.isinf(rep.sdr) and math.isinf(rep.efr)
        assert rep.distortion_power == 0.0

    def test_negative_distortion_raises(self):
        with pytest.raises(ValueError):
            make_report(1.0, 0.5, 1.0)


class TestEmpiricalBussgang:
    def test_identity_tf(self):
        rep = empirical_bussgang(lambda x: x, 1.0, 100_000, np.random.default_rng(1))
        assert rep.beta == pytest.approx(1.0, abs=1e-12)
        assert rep.distortion_power == pytest.approx(0.0, abs=1e-12)
        assert rep.sdr > 1e12  # distortion-free up to rounding

    def test_matches_closed_form_within_3_se(self):
        spec = QuantizerSpec(3)
        sigma = 0.3
        rng = np.random.default_rng(2)
        n = 1_000_000
        x = rng.standard_normal(n) * sigma
        fx = ideal_midrise_quantize(x, spec)
        beta_ref = ideal_gain(spec, sigma)
        se = np.std(x * fx - beta_ref * x * x) / (math.sqrt(n) * np.mean(x * x))
        rep = empirical_bussgang(
            lambda v: ideal_midrise_quantize(v, spec), sigma, n, np.random.default_rng(2)
        )
        assert abs(rep.beta - beta_ref) < 3 * se

    def test_matches_cells_for_realized_sar(self):
        spec = QuantizerSpec(4)
        sigma = 0.35
        chip = sample_mismatch(spec, 0.03, "all-capacitors", np.random.default_rng(3))
        cells = enumerate_tf_cells(spec, chip)
        exact = cells_bussgang(cells, sigma)
        n = 1_000_000
        rng = np.random.default_rng(4)
        x = rng.standard_normal(n) * sigma
        fx = sar_convert(x, spec, chip)
        se_beta = np.std(x * fx - exact.beta * x * x) / (math.sqrt(n) * np.mean(x * x))
        se_m2 = np.std(fx * fx) / math.sqrt(n)
        rep = empirical_bussgang(
            lambda v: sar_convert(v, spec, chip), sigma, n, np.random.default_rng(4)
        )
        assert abs(rep.beta - exact.beta) < 3 * se_beta
        assert abs(rep.second_moment - exact.second_moment) < 3 * se_m2

    def test_rejects_tiny_sample_budget(self):
        with pytest.raises(ValueError):
            empirical_bussgang(lambda x: x, 1.0, 10, np.random.default_rng(0))


class TestCellsBussgang:
    def test_ideal_table_matches_closed_forms(self):
        for bits in (2, 4, 6):
            spec = QuantizerSpec(bits)
            cells = enumerate_tf_cells(
                spec, MismatchRealization(np.zeros(bits - 1), np.zeros(bits - 1))
            )
            for sigma in (0.2, 0.5):
                rep = cells_bussgang(cells, sigma)
                assert rep.beta == pytest.approx(ideal_gain(spec, sigma), abs=1e-12)
                assert rep.second_moment == pytest.approx(
                    ideal_second_moment(spec, sigma), abs=1e-12
                )

    def test_single_zero_cell(self):
        table = CellTable(np.array([-np.inf]), np.array([np.inf]), np.array([0.0]))
        rep = cells_bussgang(table, 0.5)
        assert rep.beta == 0.0 and rep.second_moment == 0.0

    def test_realized_chip_against_quadrature(self):
        spec = QuantizerSpec(4)
        chip = sample_mismatch(spec, 0.05, "all-capacitors", np.random.default_rng(9))
        cells = enumerate_tf_cells(spec, chip)
        sigma = 0.35
        bps = cell_breakpoints(cells)
        rep = cells_bussgang(cells, sigma)
        assert rep.beta == pytest.approx(
            gain_oracle(cells.evaluate, sigma, bps), abs=1e-9
        )
        assert rep.second_moment == pytest.approx(
            second_moment_oracle(cells.evaluate, sigma, bps), abs=1e-9
        )


class TestBussgangProperties:
    def test_gain_minimizes_quadratic_error(self):
        # E[(f - cX)^2] strictly larger at c = beta*(1 +- 0.01)
        cases = []
        spec = QuantizerSpec(4)
        cases.append(
            (
                lambda x: ideal_midrise_quantize(x, spec),
                staircase_breakpoints(spec),
                ideal_gain(spec, 0.35),
                0.35,
            )
        )
        m = MsbMismatch(0.1, -0.05)
        cases.append(
            (lambda x: msb_model_eval(x, m), msb_model_breakpoints(m), msb_gain(m, 0.5), 0.5)
        )
        for tf, bps, beta, sigma in cases:
            e_xf = quadrature_expectation(lambda x: x * tf(x), sigma, bps)
            e_f2 = quadrature_expectation(lambda x: tf(x) ** 2, sigma, bps)

            def err(c):
                return e_f2 - 2 * c * e_xf + c * c * sigma * sigma

            assert err(beta * 1.01) > err(beta)
            assert err(beta * 0.99) > err(beta)

    def test_distortion_uncorrelated_with_input(self):
        spec = QuantizerSpec(4)
        sigma = 0.35
        beta = ideal_gain(spec, sigma)
        rng = np.random.default_rng(17)
        n = 1_000_000
        x = rng.standard_normal(n) * sigma
        d = ideal_midrise_quantize(x, spec) - beta * x
        corr = np.corrcoef(x, d)[0, 1]
        assert abs(corr) < 4 / math.sqrt(n)

    def test_efr_curve_unimodal_for_low_resolutions(self):
        for bits in range(2, 7):
            spec = QuantizerSpec(bits)
            grid = np.geomspace(0.02, 3.0, 200)
            efr = np.array([ideal_efr(spec, s) for s in grid])
            # ignore sub-1e-9 wiggle on the flat 1-bit-like plateau at tiny sigma
            steps = np.diff(efr)
            steps = steps[np.abs(steps) > 1e-9]
            rises = steps > 0
            # one contiguous rising block followed by one falling block
            assert np.sum(np.abs(np.diff(rises.astype(int)))) <= 1


class TestPeakEfr:
    def test_flat_curve_returns_deterministic_unit_peak(self):
        spec = QuantizerSpec(1)
        sigma_star, efr_star = peak_efr(lambda s: ideal_efr(spec, s))
        assert efr_star == pytest.approx(1.0, abs=1e-9)
        assert 0.02 <= sigma_star <= 3.0
        assert (sigma_star, efr_star) == peak_efr(lambda s: ideal_efr(spec, s))

    def test_recovers_known_maximum(self):
        truth = 0.314
        sigma_star, efr_star = peak_efr(lambda s: 2.0 - (math.log(s / truth)) ** 2)
        assert sigma_star == pytest.approx(truth, abs=2e-4)
        assert efr_star == pytest.approx(2.0, abs=1e-6)

    def test_deterministic(self):
        spec = QuantizerSpec(4)
        a = peak_efr(lambda s: ideal_efr(spec, s))
        b = peak_efr(lambda s: ideal_efr(spec, s))
        assert a == b

    def test_optimal_gain_increases_with_mismatch(self):
        stars = []
        for m in (0.025, 0.05, 0.1):
            mm = MsbMismatch(m, -m)
            stars.append(peak_efr(lambda s: msb_efr(mm, s))[0])
        assert stars[0] < stars[1] < stars[2]

    def test_rejects_nan_curve(self):
        with pytest.raises(ValueError):
            peak_efr(lambda s: float("nan"))
