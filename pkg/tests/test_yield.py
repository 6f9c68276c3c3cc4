"""Quantile-EFR yield surfaces over chip realizations."""

import numpy as np
import pytest

from sarmimo.bussgang import ideal_efr
from sarmimo.quantizer import QuantizerSpec
from sarmimo.yield_mc import YieldSweepConfig, efr_quantile_surface

SIGMA_X_GRID = tuple(np.geomspace(0.1, 1.0, 24))


def small_config(**overrides):
    base = dict(
        spec=QuantizerSpec(4),
        sigma_m_grid=(0.0, 0.0125, 0.025),
        sigma_x_grid=SIGMA_X_GRID,
        trials=100,
        quantile=0.10,
        master_seed=77,
    )
    base.update(overrides)
    return YieldSweepConfig(**base)


class TestConfigValidation:
    def test_trials_floor_scales_with_quantile(self):
        with pytest.raises(ValueError):
            small_config(trials=50)  # 10/0.1 = 100 minimum
        small_config(trials=100, quantile=0.2)

    def test_rejects_bad_grids(self):
        with pytest.raises(ValueError):
            small_config(sigma_x_grid=())
        with pytest.raises(ValueError):
            small_config(sigma_x_grid=(0.0, 0.5))
        with pytest.raises(ValueError):
            small_config(sigma_m_grid=(-0.01,))

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            small_config(method="guess")


class TestSurface:
    def test_zero_mismatch_rows_equal_ideal_curve(self):
        config = small_config(sigma_m_grid=(0.0,))
        surface = efr_quantile_surface(config)
        ideal = np.array([ideal_efr(config.spec, s) for s in config.sigma_x_grid])
        np.testing.assert_allclose(surface.quantile_efr, ideal, atol=1e-9)
        np.testing.assert_allclose(surface.mean_efr, ideal, atol=1e-9)

    def test_deterministic_and_thread_invariant(self):
        config = small_config()
        serial = efr_quantile_surface(config, threads=1)
        again = efr_quantile_surface(config, threads=1)
        threaded = efr_quantile_surface(config, threads=4)
        np.testing.assert_array_equal(serial.quantile_efr, again.quantile_efr)
        np.testing.assert_array_equal(serial.quantile_efr, threaded.quantile_efr)
        np.testing.assert_array_equal(serial.mean_efr, threaded.mean_efr)

    def test_lower_quantile_bounded_by_upper_quantile(self):
        lo = efr_quantile_surface(small_config(quantile=0.10))
        hi = efr_quantile_surface(small_config(quantile=0.90))
        assert np.all(lo.quantile_efr <= hi.quantile_efr)
        np.testing.assert_array_equal(lo.mean_efr, hi.mean_efr)

    def test_quantile_non_increasing_in_sigma_m(self):
        config = small_config(sigma_m_grid=(0.0, 0.00625, 0.0125, 0.025, 0.05))
        surface = efr_quantile_surface(config)
        n_x = len(config.sigma_x_grid)
        grid = surface.quantile_efr.reshape(len(config.sigma_m_grid), n_x)
        assert np.all(np.diff(grid, axis=0) <= 0.02)  # sampling tolerance

    def test_monte_carlo_method_agrees_with_exact_cells(self):
        # dual-route consistency on a 2x2 spot check
        exact = efr_quantile_surface(
            small_config(sigma_m_grid=(0.0125,), sigma_x_grid=(0.25, 0.5), trials=100)
        )
        mc = efr_quantile_surface(
            small_config(
                sigma_m_grid=(0.0125,),
                sigma_x_grid=(0.25, 0.5),
                trials=100,
                method="monte-carlo",
                mc_samples=200_000,
            )
        )
        np.testing.assert_allclose(mc.quantile_efr, exact.quantile_efr, atol=0.05)

    def test_rows_iterate_sigma_m_major(self):
        config = small_config(sigma_m_grid=(0.0, 0.0125), sigma_x_grid=(0.3, 0.4, 0.5))
        rows = list(efr_quantile_surface(config).rows())
        assert [r[0] for r in rows] == [0.0] * 3 + [0.0125] * 3
        assert [r[1] for r in rows] == [0.3, 0.4, 0.5] * 2
        assert all(r[4] == config.trials for r in rows)
