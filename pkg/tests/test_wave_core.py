"""Closed-form front, cubic nonlinearity and derived constants."""

import math

import numpy as np
import pytest

from wavelab.core.grid_ops import integrate
from wavelab.core.wave_core import (
    F_THIRD,
    derive_constants,
    eigen_residual,
    eta_of,
    f,
    f_derivatives,
    ground_state_residual,
    plateau_distance_norm_sq,
    reaction_increment,
    shifted_wave_slope_norm_sq,
    taylor_remainder,
    tw_profile,
    wave,
    wave_slope,
)
from wavelab.utils.errors import ConfigurationError


class TestDeriveConstants:
    def test_reference_parameters(self, params):
        assert params.k == pytest.approx(1.0, abs=1e-12)
        assert params.c == pytest.approx(0.5, abs=1e-12)
        assert params.eta == pytest.approx(13.0 / 48.0, abs=1e-12)
        assert params.kappa_star == pytest.approx(1.0 / 15.0, abs=1e-12)
        assert params.C_star == pytest.approx(18.0, abs=1e-12)
        assert params.c_star == pytest.approx(1.0 / 255.0, abs=1e-12)
        assert params.m == pytest.approx(36.0, abs=1e-12)

    def test_threshold_above_half_uses_distance_to_one(self):
        low = derive_constants(1.0, 2.0, 0.25)
        high = derive_constants(1.0, 2.0, 0.75)
        assert high.kappa_star == pytest.approx(low.kappa_star)
        assert high.c == pytest.approx(-low.c)

    def test_stability_radius_equals_exit_radius_at_half_delta(self, params):
        assert params.stability_radius(0.5) == pytest.approx(params.c_star, rel=1e-12)

    @pytest.mark.parametrize(
        "kwargs, key",
        [
            ({"nu": 0.0, "b": 2.0, "a": 0.25}, "model.nu"),
            ({"nu": 1.0, "b": -1.0, "a": 0.25}, "model.b"),
            ({"nu": 1.0, "b": 2.0, "a": 1.5}, "model.a"),
            ({"nu": 1.0, "b": 2.0, "a": 0.25, "m_factor": 0.5}, "model.m_factor"),
        ],
    )
    def test_invalid_parameters_name_the_key(self, kwargs, key):
        with pytest.raises(ConfigurationError) as exc:
            derive_constants(**kwargs)
        assert exc.value.key == key
        assert key in str(exc.value)


class TestCubic:
    def test_roots(self):
        assert f(0.0, 0.25) == 0.0
        assert f(1.0, 0.25) == 0.0
        assert f(0.25, 0.25) == 0.0

    def test_value_at_half(self):
        assert f(0.5, 0.25) == pytest.approx(0.0625, abs=1e-15)

    def test_derivatives(self):
        fp, fpp, fppp = f_derivatives(0.0, 0.25)
        assert fp == pytest.approx(-0.25)
        assert fpp == pytest.approx(2.5)
        assert fppp == F_THIRD == -6.0

    def test_sup_of_first_derivative_is_eta(self):
        v = np.linspace(-1.0, 2.0, 300001)
        fp, _, _ = f_derivatives(v, 0.25)
        assert float(np.max(fp)) == pytest.approx(eta_of(0.25), abs=1e-9)
        assert eta_of(0.25) == pytest.approx(13.0 / 48.0)

    @pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 0.9])
    def test_one_sided_dissipativity(self, a):
        rng = np.random.default_rng(10)
        s = rng.uniform(-2.0, 3.0, 100_000)
        t = rng.uniform(-2.0, 3.0, 100_000)
        lhs = (f(s, a) - f(t, a)) * (s - t)
        assert np.all(lhs <= eta_of(a) * (s - t) ** 2 + 1e-12 * np.abs(s - t))

    def test_reaction_increment_matches_difference(self):
        rng = np.random.default_rng(3)
        v = rng.uniform(0.0, 1.0, 200)
        u = rng.uniform(-0.5, 0.5, 200)
        np.testing.assert_allclose(
            reaction_increment(u, v, 0.25), f(u + v, 0.25) - f(v, 0.25), atol=1e-14
        )

    def test_taylor_remainder_is_nonlinear_part(self):
        rng = np.random.default_rng(4)
        v = rng.uniform(0.0, 1.0, 200)
        u = rng.uniform(-0.5, 0.5, 200)
        fp, _, _ = f_derivatives(v, 0.25)
        np.testing.assert_allclose(
            reaction_increment(u, v, 0.25), fp * u + taylor_remainder(u, v, 0.25), atol=1e-14
        )


class TestProfile:
    def test_values_at_origin(self, params):
        v, v_x, v_xx, v_xxx = tw_profile(0.0, params)
        assert v == 0.5
        assert v_x == pytest.approx(0.25)
        assert v_xx == pytest.approx(0.0, abs=1e-15)
        assert v_xxx == pytest.approx(-0.125)

    def test_second_derivative_bound(self, grid, params):
        _, v_x, v_xx, _ = tw_profile(grid.points, params)
        assert np.all(np.abs(v_xx) <= 3.0 * params.k * np.abs(v_x) + 1e-300)

    def test_slope_matches_profile(self, grid, params):
        _, v_x, _, _ = tw_profile(grid.points, params)
        np.testing.assert_allclose(wave_slope(grid.points, params), v_x, rtol=1e-14)
        core = np.abs(grid.points) <= 10.0
        v = wave(grid.points[core], params)
        np.testing.assert_allclose(v_x[core], params.k * v * (1.0 - v), rtol=1e-9)

    def test_eigen_relation(self, grid, params):
        assert float(np.max(np.abs(eigen_residual(grid.points, params)))) <= 1e-10

    def test_eigen_relation_other_parameters(self, grid):
        other = derive_constants(0.5, 3.0, 0.4)
        assert float(np.max(np.abs(eigen_residual(grid.points, other)))) <= 1e-10

    def test_ground_state_identity(self, grid, params):
        assert float(np.max(np.abs(ground_state_residual(grid.points, params)))) <= 1e-10

    def test_tails_keep_relative_precision(self, params):
        _, v_x, _, _ = tw_profile(np.array([-35.0, 35.0]), params)
        assert v_x[0] == pytest.approx(math.exp(-35.0), rel=1e-12)
        assert v_x[1] == pytest.approx(math.exp(-35.0), rel=1e-12)


class TestClosedFormIntegrals:
    def test_plateau_distance(self, grid, params):
        assert plateau_distance_norm_sq(params) == pytest.approx(2.0 * math.log(2.0) - 1.0)
        v = wave(grid.points, params)
        plateau = np.minimum(v, 1.0 - v)
        # kink at x = 0 limits the trapezoid rule to O(dx^2)
        assert integrate(grid, plateau * plateau) == pytest.approx(0.386294, abs=1e-4)

    def test_wave_slope_norm(self, grid, params):
        w = wave_slope(grid.points, params)
        assert integrate(grid, w * w) == pytest.approx(shifted_wave_slope_norm_sq(params), abs=1e-10)
