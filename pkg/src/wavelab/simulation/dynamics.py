"""
Deterministic Dynamics

IMEX time stepping of the perturbation u = v - v^TW(. + ct) coupled to the
phase-adaptation ODE dC/dt = -m B(t, C), with the diagnostics that certify
exponential stability of the front.

One step:
    u_{n+1} = (I - nu dt Delta_h)^{-1} (u_n + dt b G(t_n, u_n))
    C_{n+1} = C_n - dt m B(t_{n+1}, C_n, v_{n+1})
The field update uses the phase from the start of the step.
"""

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from wavelab.core.grid_ops import (
    FieldArray,
    Grid,
    diffusion_banded,
    diffusion_solve,
    dirichlet_energy,
    inner_h,
    norm_h,
    norm_v,
)
from wavelab.core.wave_core import reaction_increment, wave, wave_slope
from wavelab.utils.config import InitSection
from wavelab.utils.errors import BlowUpError, ConfigurationError
from wavelab.utils.schemas import DetTrajectory, IneqReport, ModelParams


logger = logging.getLogger(__name__)


# Largest argument math.exp accepts without overflow.
_MAX_EXP_ARG = 709.0


def scaled_exp(scale: float, exponent: float) -> float:
    """scale * exp(exponent) for scale >= 0, saturating to inf instead of overflowing."""
    if scale <= 0.0:
        return 0.0
    log_value = math.log(scale) + exponent
    return math.exp(log_value) if log_value < _MAX_EXP_ARG else math.inf


def default_dt(params: ModelParams) -> float:
    """1e-3 min(1, 1/(b eta))."""
    return 1e-3 * min(1.0, 1.0 / (params.b * params.eta))


class PhaseState(BaseModel):
    """
    Time, phase and perturbation of one run.

    u_tilde is the phase-adapted perturbation v - v^TW(. + C + ct) and is
    always recomputed from (t, C, u) by ``build``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: float
    C: float
    u: np.ndarray
    u_tilde: np.ndarray

    @classmethod
    def build(cls, grid: Grid, params: ModelParams, t: float, C: float, u: FieldArray) -> "PhaseState":
        x = grid.points
        u_tilde = u + wave(x + params.c * t, params) - wave(x + C + params.c * t, params)
        return cls(t=t, C=C, u=u, u_tilde=u_tilde)


def phase_drift(grid: Grid, params: ModelParams, t: float, C: float, v_field: FieldArray) -> float:
    """
    B(t, C) = <w(. + C + ct), v^TW(. + C + ct) - v(t)>_H by trapezoid quadrature.

    The phase ODE is dC/dt = -m B.
    """
    shifted = grid.points + C + params.c * t
    return inner_h(grid, wave_slope(shifted, params), wave(shifted, params) - v_field)


def phase_lipschitz_check(
    grid: Grid,
    params: ModelParams,
    u: FieldArray,
    t: float = 0.0,
    C_max: Optional[float] = None,
    n_pairs: int = 256,
    seed: Optional[int] = None,
    rel_tol: float = 1e-6,
) -> IneqReport:
    """
    Largest secant slope of C -> B(t, C) over random pairs in [-C_max, C_max]
    against the bound ||w_x|| ||u|| + ||w||^2 = sqrt(k^3/30) ||u|| + k/6,
    which does not depend on t.
    """
    k = params.k
    C_max = 4.0 / k if C_max is None else C_max
    rng = np.random.default_rng(seed)
    v_field = u + wave(grid.points + params.c * t, params)
    pairs = rng.uniform(-C_max, C_max, size=(n_pairs, 2))
    slope = 0.0
    for C1, C2 in pairs:
        if C1 == C2:
            continue
        dB = phase_drift(grid, params, t, C1, v_field) - phase_drift(grid, params, t, C2, v_field)
        slope = max(slope, abs(dB) / abs(C1 - C2))
    bound = math.sqrt(k ** 3 / 30.0) * norm_h(grid, u) + k / 6.0
    return IneqReport.from_sides(
        name="phase_lipschitz",
        lhs=slope,
        rhs=bound,
        rel_tol=rel_tol,
        seed=seed,
        grid=grid.describe(),
    )


def initial_perturbation(grid: Grid, params: ModelParams, init: InitSection, delta: float) -> FieldArray:
    """
    u0 for the configured family.

    bump: amplitude exp(-(x - center)^2 / (2 width^2)), rescaled to
    norm_fraction times the stability radius when norm_fraction is set.
    shifted-wave: v^TW(. + y0) - v^TW. zero: identically 0.
    """
    x = grid.points
    if init.family == "zero":
        return grid.zeros()
    if init.family == "shifted-wave":
        return wave(x + init.y0, params) - wave(x, params)

    u0 = init.amplitude * np.exp(-0.5 * ((x - init.center) / init.width) ** 2)
    if init.norm_fraction is not None:
        current = norm_h(grid, u0)
        if current == 0.0:
            raise ConfigurationError("cannot rescale a zero bump", key="init.norm_fraction")
        u0 = u0 * (init.norm_fraction * params.stability_radius(delta) / current)
    u0[0] = u0[-1] = 0.0
    return u0


class DeterministicSimulator:
    """
    Deterministic IMEX integrator for one (grid, params, dt).

    The banded diffusion matrix is built once and reused for every step.
    """

    def __init__(self, grid: Grid, params: ModelParams, dt: Optional[float] = None) -> None:
        self.grid = grid
        self.params = params
        self.dt = default_dt(params) if dt is None else dt
        if not self.dt > 0.0:
            raise ConfigurationError(f"must be positive, got {self.dt}", key="time.dt")
        self._banded = diffusion_banded(grid, params.nu * self.dt)

    # ------------------------------------------------------------------
    # Guards
    # ------------------------------------------------------------------

    def check_horizon(self, T_end: float, y0: float = 0.0) -> None:
        """
        Require |c| T + (2 |y0| + 1) + 10/k < L - 5/k.

        Raises:
            ConfigurationError: if the front would reach the truncation layer
        """
        k = self.params.k
        reach = abs(self.params.c) * T_end + 2.0 * abs(y0) + 1.0 + 10.0 / k
        limit = self.grid.half_width - 5.0 / k
        if not reach < limit:
            raise ConfigurationError(
                f"front travels to {reach:.4g} but the grid only allows {limit:.4g}; "
                f"increase grid.L_factor or shorten the run",
                key="grid.L_factor",
            )

    # ------------------------------------------------------------------
    # Right-hand sides
    # ------------------------------------------------------------------

    def phase_rhs(self, t: float, C: float, v_field: FieldArray) -> float:
        """B(t, C) for the full field v = u + v^TW(. + ct)."""
        return phase_drift(self.grid, self.params, t, C, v_field)

    def reaction(self, t: float, u: FieldArray) -> FieldArray:
        """G(t, u) = f(u + v^TW(. + ct)) - f(v^TW(. + ct))."""
        v_ct = wave(self.grid.points + self.params.c * t, self.params)
        return reaction_increment(u, v_ct, self.params.a)

    def phase_velocity(self, state: PhaseState) -> float:
        """dC/dt = m <w(. + C + ct), u~>."""
        shifted = self.grid.points + state.C + self.params.c * state.t
        return self.params.m * inner_h(self.grid, wave_slope(shifted, self.params), state.u_tilde)

    # ------------------------------------------------------------------
    # Stepping
    # ------------------------------------------------------------------

    def initial_state(self, u0: FieldArray, C0: float = 0.0) -> PhaseState:
        self.grid.check(u0)
        return PhaseState.build(self.grid, self.params, 0.0, C0, np.array(u0, dtype=float))

    def _advance(self, state: PhaseState, rhs: FieldArray, step: int) -> PhaseState:
        rhs[0] = rhs[-1] = 0.0
        u_next = diffusion_solve(self.grid, rhs, self.params.nu * self.dt, self._banded)
        if not np.all(np.isfinite(u_next)):
            raise BlowUpError(step=step, t=state.t + self.dt)

        t_next = state.t + self.dt
        v_next = u_next + wave(self.grid.points + self.params.c * t_next, self.params)
        C_next = state.C - self.dt * self.params.m * self.phase_rhs(t_next, state.C, v_next)
        if not math.isfinite(C_next):
            raise BlowUpError(step=step, t=t_next)
        return PhaseState.build(self.grid, self.params, t_next, C_next, u_next)

    def step_det(self, state: PhaseState, step: int = 0) -> PhaseState:
        """
        One IMEX step.

        Raises:
            BlowUpError: if the field or phase becomes non-finite
        """
        rhs = state.u + self.dt * self.params.b * self.reaction(state.t, state.u)
        return self._advance(state, rhs, step)

    # ------------------------------------------------------------------
    # Diagnostics
    # ------------------------------------------------------------------

    def energy_identity_residual(self, prev: PhaseState, curr: PhaseState) -> float:
        """
        |(||u~_{n+1}||^2 - ||u~_n||^2) / (2 dt) - RHS(state_n)| with
        RHS = -nu ||u~_x||^2 + b <G~(u~), u~> - m <w(. + C + ct), u~>^2
        and G~ taken around the phase-adapted front.
        """
        p = self.params
        dt = curr.t - prev.t
        ut = prev.u_tilde
        shifted = self.grid.points + prev.C + p.c * prev.t
        lhs = (inner_h(self.grid, curr.u_tilde, curr.u_tilde) - inner_h(self.grid, ut, ut)) / (2.0 * dt)
        dissipation = p.nu * dirichlet_energy(self.grid, ut)
        reaction = p.b * inner_h(self.grid, reaction_increment(ut, wave(shifted, p), p.a), ut)
        projection = p.m * inner_h(self.grid, wave_slope(shifted, p), ut) ** 2
        return abs(lhs - (-dissipation + reaction - projection))

    def run_det(
        self,
        u0: FieldArray,
        T_end: float,
        delta: float = 0.5,
        sample_every: int = 100,
        C0: float = 0.0,
        y0: float = 0.0,
    ) -> DetTrajectory:
        """
        Integrate to T_end and sample the diagnostics.

        Args:
            u0: Initial perturbation, zero at both ends
            T_end: Final time
            delta: Decay-certificate parameter; the envelope decays at (1 - delta) kappa*
            sample_every: Steps between samples (first and last step always sampled)
            C0: Initial phase
            y0: Shift budget used by the horizon guard

        Raises:
            ConfigurationError: if the horizon guard fails (before any step)
            BlowUpError: if the solution becomes non-finite
        """
        self.check_horizon(T_end, y0)
        n_steps = max(1, int(round(T_end / self.dt)))
        state = self.initial_state(u0, C0)
        logger.info(f"run_det: {n_steps} steps of dt={self.dt:.3g}, ||u0||={norm_h(self.grid, state.u):.3e}")
        return self.sample_run(state, n_steps, self.step_det, delta, sample_every, with_residual=True)

    def sample_run(
        self,
        state: PhaseState,
        n_steps: int,
        advance: Callable[[PhaseState, int], PhaseState],
        delta: float,
        sample_every: int,
        with_residual: bool,
    ) -> DetTrajectory:
        """
        Drive ``advance`` for n_steps and record diagnostics at step 0, every
        ``sample_every`` steps and at the last step.

        The energy residual of a sample belongs to the step ending there (the
        first sample takes the first step's); it is NaN when ``with_residual``
        is off.
        """
        p = self.params
        rate = (1.0 - delta) * p.kappa_star
        u0_norm = norm_h(self.grid, state.u)
        traj = DetTrajectory()

        def record(s: PhaseState, residual: float) -> None:
            traj.t.append(s.t)
            traj.norm_h.append(norm_h(self.grid, s.u_tilde))
            traj.norm_v.append(norm_v(self.grid, s.u_tilde))
            traj.C.append(s.C)
            traj.Cdot.append(self.phase_velocity(s))
            traj.envelope.append(scaled_exp(u0_norm, -rate * s.t))
            traj.lem0_envelope.append(scaled_exp(u0_norm, p.b * p.eta * s.t))
            traj.norm_u.append(norm_h(self.grid, s.u))
            traj.energy_residual.append(residual)
            traj.front.append(-(s.C + p.c * s.t))

        record(state, math.nan)
        for step in range(n_steps):
            new_state = advance(state, step)
            residual = self.energy_identity_residual(state, new_state) if with_residual else math.nan
            if step == 0:
                traj.energy_residual[0] = residual
            state = new_state
            if (step + 1) % sample_every == 0 or step == n_steps - 1:
                record(state, residual)

        return traj


# =============================================================================
# Trajectory summaries
# =============================================================================

def fit_decay_rate(traj: DetTrajectory, skip_fraction: float = 0.1) -> Optional[float]:
    """
    Least-squares decay rate of log ||u~||_H over samples after the first
    ``skip_fraction`` of the run; None when fewer than two usable samples.
    """
    t = np.asarray(traj.t)
    norms = np.asarray(traj.norm_h)
    if len(t) < 2:
        return None
    keep = (t >= t[0] + skip_fraction * (t[-1] - t[0])) & (norms > 0.0) & np.isfinite(norms)
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(t[keep], np.log(norms[keep]), 1)
    return float(-slope)


def _finite_max(values: List[float]) -> Optional[float]:
    finite = [v for v in values if math.isfinite(v)]
    return max(finite) if finite else None


def summarize_trajectory(
    traj: DetTrajectory,
    params: ModelParams,
    delta: float,
    envelope_slack: float = 0.05,
) -> Dict[str, object]:
    """Summary row for simulate-det."""
    norm_h_arr = np.asarray(traj.norm_h)
    norm_u_arr = np.asarray(traj.norm_u)
    growth_ok = bool(np.all(norm_u_arr <= np.asarray(traj.lem0_envelope) * (1.0 + 1e-9) + 1e-300))
    decay_ok = bool(np.all(norm_h_arr <= np.asarray(traj.envelope) * (1.0 + envelope_slack) + 1e-300))
    u0_norm = traj.norm_u[0] if traj.norm_u else 0.0
    return {
        "summary": True,
        "fitted_rate": fit_decay_rate(traj),
        "theoretical_rate": (1.0 - delta) * params.kappa_star,
        "small_data": u0_norm < params.stability_radius(delta),
        "lem0_envelope_ok": growth_ok,
        "decay_envelope_ok": decay_ok,
        "final_C": traj.C[-1] if traj.C else 0.0,
        "final_norm_h": traj.norm_h[-1] if traj.norm_h else 0.0,
        "max_energy_residual": _finite_max(traj.energy_residual),
    }


def run_det(
    params: ModelParams,
    grid: Grid,
    u0: FieldArray,
    dt: Optional[float],
    T_end: float,
    delta: float = 0.5,
    sample_every: int = 100,
    C0: float = 0.0,
    y0: float = 0.0,
) -> DetTrajectory:
    """Functional form of DeterministicSimulator.run_det."""
    return DeterministicSimulator(grid, params, dt).run_det(u0, T_end, delta, sample_every, C0=C0, y0=y0)
