"""IMEX stepping, phase adaptation and trajectory diagnostics."""

import math

import numpy as np
import pytest

from wavelab.core.grid_ops import Grid, norm_h
from wavelab.core.wave_core import derive_constants, wave
from wavelab.simulation.dynamics import (
    DeterministicSimulator,
    PhaseState,
    default_dt,
    fit_decay_rate,
    initial_perturbation,
    run_det,
    scaled_exp,
    summarize_trajectory,
)
from wavelab.utils.config import InitSection, parse_config
from wavelab.utils.errors import ConfigurationError
from wavelab.utils.schemas import DetTrajectory


def _bump(grid, amplitude=1e-2, width=1.0):
    u0 = amplitude * np.exp(-0.5 * (grid.points / width) ** 2)
    u0[0] = u0[-1] = 0.0
    return u0


def test_default_dt(params):
    assert default_dt(params) == pytest.approx(1e-3)
    stiff = derive_constants(1.0, 20.0, 0.25)
    assert default_dt(stiff) == pytest.approx(1e-3 / (20.0 * 13.0 / 48.0))


class TestInitialPerturbation:
    def test_bump_rescaled_to_fraction_of_radius(self, coarse_grid, params):
        u0 = initial_perturbation(coarse_grid, params, InitSection(norm_fraction=0.5), delta=0.5)
        assert norm_h(coarse_grid, u0) == pytest.approx(0.5 * params.stability_radius(0.5), rel=1e-9)
        assert u0[0] == 0.0 and u0[-1] == 0.0

    def test_shifted_wave(self, coarse_grid, params):
        u0 = initial_perturbation(coarse_grid, params, InitSection(family="shifted-wave", y0=0.5), 0.5)
        x = coarse_grid.points
        np.testing.assert_array_equal(u0, wave(x + 0.5, params) - wave(x, params))

    def test_zero(self, coarse_grid, params):
        u0 = initial_perturbation(coarse_grid, params, InitSection(family="zero"), 0.5)
        assert not np.any(u0)

    def test_zero_bump_cannot_be_rescaled(self, coarse_grid, params):
        init = InitSection(amplitude=0.0, norm_fraction=0.5)
        with pytest.raises(ConfigurationError) as exc:
            initial_perturbation(coarse_grid, params, init, 0.5)
        assert exc.value.key == "init.norm_fraction"


class TestSimulator:
    def test_rejects_non_positive_dt(self, coarse_grid, params):
        for dt in (0.0, -1e-3):
            with pytest.raises(ConfigurationError) as exc:
                DeterministicSimulator(coarse_grid, params, dt=dt)
            assert exc.value.key == "time.dt"

    def test_horizon_guard(self, coarse_grid, params):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        sim.check_horizon(10.0)
        with pytest.raises(ConfigurationError) as exc:
            sim.run_det(_bump(coarse_grid), T_end=100.0)
        assert exc.value.key == "grid.L_factor"

    def test_horizon_counts_initial_shift(self, coarse_grid, params):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        sim.check_horizon(40.0, y0=0.0)
        with pytest.raises(ConfigurationError):
            sim.check_horizon(40.0, y0=5.0)

    def test_zero_perturbation_is_steady(self, coarse_grid, params):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        state = sim.initial_state(coarse_grid.zeros())
        for step in range(20):
            state = sim.step_det(state, step)
        assert not np.any(state.u)
        assert state.C == 0.0
        assert state.t == pytest.approx(0.2)
        assert sim.phase_velocity(state) == 0.0

    def test_phase_state_adapted_perturbation(self, coarse_grid, params):
        u = _bump(coarse_grid)
        state = PhaseState.build(coarse_grid, params, t=1.0, C=0.0, u=u)
        np.testing.assert_allclose(state.u_tilde, u, atol=1e-15)
        shifted = PhaseState.build(coarse_grid, params, t=1.0, C=0.3, u=u)
        x = coarse_grid.points
        expected = u + wave(x + params.c, params) - wave(x + 0.3 + params.c, params)
        np.testing.assert_allclose(shifted.u_tilde, expected, atol=1e-15)

    def test_phase_moves_towards_perturbation(self, coarse_grid, params):
        # a positive bump at the front looks like a shift to the left, so C grows
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        state = sim.step_det(sim.initial_state(_bump(coarse_grid)))
        assert state.C > 0.0

    def test_sampling_schedule(self, coarse_grid, params):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        traj = sim.run_det(_bump(coarse_grid), T_end=1.0, sample_every=25)
        assert len(traj.t) == 5
        assert traj.t[0] == 0.0
        assert traj.t[-1] == pytest.approx(1.0)
        assert all(math.isfinite(r) for r in traj.energy_residual)
        assert traj.front[0] == 0.0
        assert len(traj.rows()) == 5

    def test_functional_form_matches_class(self, coarse_grid, params):
        u0 = _bump(coarse_grid)
        a = run_det(params, coarse_grid, u0, 1e-2, 0.5, sample_every=10)
        b = DeterministicSimulator(coarse_grid, params, 1e-2).run_det(u0, 0.5, sample_every=10)
        assert a.rows() == b.rows()

    def test_functional_form_guards_initial_shift(self, coarse_grid, params):
        with pytest.raises(ConfigurationError) as exc:
            run_det(params, coarse_grid, coarse_grid.zeros(), 1e-2, 1.0, y0=20.0)
        assert exc.value.key == "grid.L_factor"
        traj = run_det(params, coarse_grid, coarse_grid.zeros(), 1e-2, 0.1, sample_every=5, C0=0.3, y0=0.3)
        assert traj.C[0] == 0.3

    @pytest.mark.parametrize("C", [-0.1, -1e-3, 1e-3, 0.1])
    def test_phase_drift_has_sign_of_shift(self, coarse_grid, params, C):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        t = 0.5
        exact = wave(coarse_grid.points + params.c * t, params)
        assert np.sign(sim.phase_rhs(t, C, exact)) == np.sign(C)
        assert sim.phase_rhs(t, 0.0, exact) == pytest.approx(0.0, abs=1e-15)

    def test_step_self_converges_in_dt(self, coarse_grid, params):
        u0 = _bump(coarse_grid)
        finals = []
        for dt in (8e-3, 4e-3, 2e-3, 1e-3):
            sim = DeterministicSimulator(coarse_grid, params, dt=dt)
            state = sim.initial_state(u0)
            for step in range(int(round(0.4 / dt))):
                state = sim.step_det(state, step)
            finals.append(state)
        diffs = [
            norm_h(coarse_grid, coarse.u - fine.u) + abs(coarse.C - fine.C)
            for coarse, fine in zip(finals, finals[1:])
        ]
        assert all(d > 0.0 for d in diffs)
        assert diffs[1] < 0.7 * diffs[0]
        assert diffs[2] < 0.7 * diffs[1]


class TestEnergyIdentity:
    def test_first_order_in_dt(self, coarse_grid, params):
        u0 = _bump(coarse_grid)
        dts = np.array([4e-3, 2e-3, 1e-3])
        residuals = []
        for dt in dts:
            sim = DeterministicSimulator(coarse_grid, params, dt=float(dt))
            s0 = sim.initial_state(u0)
            s1 = sim.step_det(s0)
            residuals.append(sim.energy_identity_residual(s0, s1))
        slope, _ = np.polyfit(np.log(dts), np.log(residuals), 1)
        assert 0.8 <= slope <= 1.2

    def test_zero_state_has_zero_residual(self, coarse_grid, params):
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        s0 = sim.initial_state(coarse_grid.zeros())
        assert sim.energy_identity_residual(s0, sim.step_det(s0)) == 0.0


class TestSummaries:
    def test_fit_decay_rate(self):
        t = np.linspace(0.0, 10.0, 101)
        traj = DetTrajectory(t=list(t), norm_h=list(2.0 * np.exp(-0.3 * t)))
        assert fit_decay_rate(traj) == pytest.approx(0.3, rel=1e-9)

    def test_fit_needs_two_samples(self):
        assert fit_decay_rate(DetTrajectory(t=[0.0], norm_h=[1.0])) is None
        assert fit_decay_rate(DetTrajectory(t=[0.0, 1.0], norm_h=[0.0, 0.0])) is None

    def test_short_run_summary(self, coarse_grid, params):
        init = InitSection(norm_fraction=0.5)
        u0 = initial_perturbation(coarse_grid, params, init, 0.5)
        sim = DeterministicSimulator(coarse_grid, params, dt=1e-2)
        traj = sim.run_det(u0, T_end=2.0, sample_every=20)
        summary = summarize_trajectory(traj, params, delta=0.5)
        assert summary["summary"] is True
        assert summary["small_data"] is True
        assert summary["lem0_envelope_ok"] is True
        assert summary["theoretical_rate"] == pytest.approx(1.0 / 30.0)
        assert summary["max_energy_residual"] is not None

    def test_scaled_exp_saturates(self):
        assert scaled_exp(2.0, 1.0) == pytest.approx(2.0 * math.e)
        assert scaled_exp(1e-3, 750.0) == math.inf
        assert scaled_exp(0.0, 1e6) == 0.0
        assert 0.0 < scaled_exp(1e300, -1000.0) < 1e-130

    def test_standing_front_long_run(self):
        # a = 1/2: c = 0, so the horizon guard never limits T_end and b eta T passes 709
        params = derive_constants(1.0, 2.0, 0.5)
        grid = Grid.for_params(params, 40.0, 201)
        traj = DeterministicSimulator(grid, params, dt=0.5).run_det(grid.zeros(), T_end=1500.0, sample_every=500)
        assert traj.t[-1] == pytest.approx(1500.0)
        assert traj.lem0_envelope == [0.0] * len(traj.t)
        assert summarize_trajectory(traj, params, delta=0.5)["lem0_envelope_ok"] is True

    def test_summary_with_saturated_envelope(self, params):
        traj = DetTrajectory(
            t=[0.0, 3000.0],
            norm_h=[1e-3, 1e-50],
            norm_u=[1e-3, 1e-50],
            envelope=[1e-3, scaled_exp(1e-3, -100.0)],
            lem0_envelope=[1e-3, scaled_exp(1e-3, params.b * params.eta * 3000.0)],
            C=[0.0, 0.0],
            energy_residual=[math.nan, math.nan],
        )
        summary = summarize_trajectory(traj, params, delta=0.5)
        assert traj.lem0_envelope[-1] == math.inf
        assert summary["lem0_envelope_ok"] is True
        assert summary["decay_envelope_ok"] is True
        assert summary["max_energy_residual"] is None


def _load(config_dir, name):
    config = parse_config((config_dir / name).read_text(encoding="utf-8"))
    m = config.model
    params = derive_constants(m.nu, m.b, m.a, m.m_factor)
    grid = Grid.for_params(params, config.grid.L_factor, config.grid.n)
    return config, params, grid


@pytest.mark.slow
def test_small_data_decay_envelope(config_dir):
    config, params, grid = _load(config_dir, "decay.cfg")
    delta = config.model.delta
    u0 = initial_perturbation(grid, params, config.init, delta)
    sim = DeterministicSimulator(grid, params, config.time.dt)
    traj = sim.run_det(u0, config.time.T_end, delta, config.time.sample_every)
    summary = summarize_trajectory(traj, params, delta, envelope_slack=0.05)
    assert summary["small_data"]
    assert summary["decay_envelope_ok"]
    assert summary["lem0_envelope_ok"]


@pytest.mark.slow
def test_phase_recovers_initial_shift(config_dir):
    config, params, grid = _load(config_dir, "shift.cfg")
    delta = config.model.delta
    y0 = config.init.y0
    u0 = initial_perturbation(grid, params, config.init, delta)
    sim = DeterministicSimulator(grid, params, config.time.dt)
    traj = sim.run_det(u0, config.time.T_end, delta, config.time.sample_every, y0=y0)
    assert traj.norm_h[-1] <= 1e-3
    assert abs(traj.C[-1] - y0) <= 1e-2
    summary = summarize_trajectory(traj, params, delta)
    assert summary["lem0_envelope_ok"]
