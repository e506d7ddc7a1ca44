"""
Stochastic Dynamics

Semi-implicit Euler-Maruyama for the front perturbed by multiplicative
Q-Wiener noise, single exit trials and the Monte Carlo estimate of the exit
probability P(T < inf), T = inf{t : ||u~(t)||_H > c*}.

Trial streams come from numpy SeedSequence children keyed by
(master_seed, trial_index), so a record never depends on which worker ran it.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm
from tqdm import tqdm

from wavelab.core.grid_ops import FieldArray, Grid, norm_h
from wavelab.core.wave_core import derive_constants, plateau_distance_norm_sq, wave
from wavelab.simulation.dynamics import DeterministicSimulator, PhaseState, initial_perturbation
from wavelab.simulation.noise import NoiseModel, SigmaModel, compute_m_sqrtq, sample_increment
from wavelab.utils.config import ExperimentConfig
from wavelab.utils.errors import BlowUpError, ConfigurationError
from wavelab.utils.schemas import DetTrajectory, ExitStats, ModelParams, TrialRecord


logger = logging.getLogger(__name__)


class StochasticSimulator(DeterministicSimulator):
    """
    Deterministic IMEX step plus the explicit noise term
    sigma(u + v^TW(. + ct)) K xi dx added before the implicit solve.
    """

    def __init__(
        self,
        grid: Grid,
        params: ModelParams,
        noise: NoiseModel,
        sigma_model: SigmaModel,
        dt: Optional[float] = None,
    ) -> None:
        super().__init__(grid, params, dt)
        self.noise = noise
        self.sigma_model = sigma_model
        self.m_sqrtq = compute_m_sqrtq(noise)

    def check_noise_precondition(self) -> None:
        """
        Raises:
            ConfigurationError: if M Lip_sigma^2 > kappa* / 4
        """
        strength = self.m_sqrtq * self.sigma_model.lipschitz ** 2
        limit = self.params.kappa_star / 4.0
        if strength > limit:
            raise ConfigurationError(
                f"M Lip^2 = {strength:.4g} exceeds kappa*/4 = {limit:.4g}",
                key="noise.epsilon_sigma",
            )

    def exit_bound(self, u_tilde0_norm: float) -> Tuple[float, float]:
        """
        Returns:
            (bound on E||u~(t ^ T)||^2, bound on P(T < inf))
        """
        p = self.params
        moment = u_tilde0_norm ** 2 + (
            4.0 * self.m_sqrtq * self.sigma_model.lipschitz ** 2 / p.kappa_star
        ) * plateau_distance_norm_sq(p)
        return moment, moment / p.c_star ** 2

    def step_em(
        self,
        state: PhaseState,
        rng: np.random.Generator,
        step: int = 0,
        seed: Optional[str] = None,
    ) -> PhaseState:
        """
        One Euler-Maruyama step; the increment is drawn even when sigma is 0
        so the stream stays aligned.

        Raises:
            BlowUpError: carrying the trial seed, if the state becomes non-finite
        """
        p = self.params
        rhs = state.u + self.dt * p.b * self.reaction(state.t, state.u)
        increment = sample_increment(self.noise, self.dt, rng)
        v_field = state.u + wave(self.grid.points + p.c * state.t, p)
        rhs = rhs + self.sigma_model(v_field) * increment
        try:
            return self._advance(state, rhs, step)
        except BlowUpError as e:
            raise BlowUpError(e.step, e.t, seed=seed) from e

    def run_path(
        self,
        u0: FieldArray,
        T_end: float,
        rng: np.random.Generator,
        delta: float = 0.5,
        sample_every: int = 100,
        y0: float = 0.0,
        seed: Optional[str] = None,
    ) -> DetTrajectory:
        """Single stochastic trajectory sampled like run_det (no energy residual)."""
        self.check_horizon(T_end, y0)
        n_steps = max(1, int(round(T_end / self.dt)))
        state = self.initial_state(u0)

        def advance(s: PhaseState, step: int) -> PhaseState:
            return self.step_em(s, rng, step, seed)

        return self.sample_run(state, n_steps, advance, delta, sample_every, with_residual=False)


# =============================================================================
# Config wiring
# =============================================================================

def build_stochastic(config: ExperimentConfig) -> Tuple[StochasticSimulator, FieldArray]:
    """Simulator and initial perturbation for a validated config."""
    model = config.model
    params = derive_constants(model.nu, model.b, model.a, model.m_factor)
    grid = Grid.for_params(params, config.grid.L_factor, config.grid.n)
    ell = config.noise.ell if config.noise.ell is not None else 1.0 / params.k
    noise = NoiseModel(grid=grid, epsilon_Q=config.noise.epsilon_Q, ell=ell)
    sigma_model = SigmaModel(epsilon_sigma=config.noise.epsilon_sigma)
    sim = StochasticSimulator(grid, params, noise, sigma_model, config.time.dt)
    u0 = initial_perturbation(grid, params, config.init, model.delta)
    return sim, u0


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    """Child stream identical to SeedSequence(master_seed).spawn(...)[trial_index]."""
    return np.random.SeedSequence(master_seed, spawn_key=(trial_index,))


def run_trial(config: ExperimentConfig, trial_index: int = 0, master_seed: Optional[int] = None) -> TrialRecord:
    """
    Integrate one trial to T_max or until ||u~||_H > c*, checked every step.

    Raises:
        ConfigurationError: if M Lip^2 > kappa*/4 or the horizon guard fails
        BlowUpError: with the trial seed attached
    """
    sim, u0 = build_stochastic(config)
    sim.check_noise_precondition()
    sim.check_horizon(config.time.T_max, config.init.y0)

    master = config.mc.master_seed if master_seed is None else master_seed
    seed_seq = trial_seed(master, trial_index)
    label = f"{master}:{trial_index}"
    rng = np.random.default_rng(seed_seq)

    c_star = sim.params.c_star
    n_steps = max(1, int(round(config.time.T_max / sim.dt)))
    state = sim.initial_state(u0)
    current = norm_h(sim.grid, state.u_tilde)
    max_norm = current
    exit_time: Optional[float] = 0.0 if current > c_star else None

    step = 0
    while exit_time is None and step < n_steps:
        state = sim.step_em(state, rng, step, label)
        step += 1
        current = norm_h(sim.grid, state.u_tilde)
        max_norm = max(max_norm, current)
        if current > c_star:
            exit_time = state.t

    return TrialRecord(
        trial_index=trial_index,
        seed=label,
        exited=exit_time is not None,
        exit_time=exit_time,
        max_norm=max_norm,
        stopped_norm_sq=current ** 2,
        final_C=state.C,
        steps=step,
    )


def _run_trial_task(args: Tuple[ExperimentConfig, int, int]) -> TrialRecord:
    config, trial_index, master_seed = args
    return run_trial(config, trial_index, master_seed)


# =============================================================================
# Monte Carlo
# =============================================================================

def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + 0.5 * confidence))
    z2 = z * z
    p_hat = successes / n
    denom = 1.0 + z2 / n
    center = p_hat + z2 / (2.0 * n)
    margin = z * math.sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))
    lo = 0.0 if successes == 0 else max(0.0, (center - margin) / denom)
    hi = 1.0 if successes == n else min(1.0, (center + margin) / denom)
    return lo, hi


def exit_probability_mc(
    config: ExperimentConfig,
    n_trials: Optional[int] = None,
    workers: Optional[int] = None,
    progress: bool = True,
) -> Tuple[ExitStats, List[TrialRecord]]:
    """
    Monte Carlo estimate of P(T < inf) against the exit bound.

    Trials that reach T_max without exiting are censored and counted as
    non-exits, which can only lower p_hat.

    Args:
        config: Validated experiment config
        n_trials: Overrides mc.n_trials
        workers: Process count; 1 runs in-process
        progress: Show a tqdm bar on stderr

    Raises:
        ConfigurationError: if the noise precondition or horizon guard fails
    """
    n = config.mc.n_trials if n_trials is None else n_trials
    master = config.mc.master_seed

    # fail fast before any process is started
    sim, u0 = build_stochastic(config)
    sim.check_noise_precondition()
    sim.check_horizon(config.time.T_max, config.init.y0)
    u_tilde0_norm = norm_h(sim.grid, sim.initial_state(u0).u_tilde)
    moment_bound, bound = sim.exit_bound(u_tilde0_norm)

    tasks = [(config, i, master) for i in range(n)]
    logger.info(f"exit-mc: {n} trials, T_max={config.time.T_max}, workers={workers or 1}, bound={bound:.4g}")

    records: List[TrialRecord] = []
    bar = tqdm(total=n, desc="trials", disable=not progress)
    if workers is None or workers <= 1:
        for task in tasks:
            records.append(_run_trial_task(task))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for record in executor.map(_run_trial_task, tasks, chunksize=max(1, n // (4 * workers))):
                records.append(record)
                bar.update(1)
    bar.close()

    return summarize_trials(records, config.time.T_max, bound, moment_bound), records


def summarize_trials(
    records: List[TrialRecord],
    T_max: float,
    theorem_bound: float,
    moment_bound: float,
) -> ExitStats:
    n = len(records)
    exits = [r for r in records if r.exited]
    lo, hi = wilson_interval(len(exits), n)
    moments = np.array([r.stopped_norm_sq for r in records], dtype=float)
    mean = float(moments.mean()) if n else 0.0
    se = float(moments.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ExitStats(
        n_trials=n,
        n_exits=len(exits),
        p_hat=len(exits) / n if n else 0.0,
        wilson_lo=lo,
        wilson_hi=hi,
        theorem_bound=theorem_bound,
        T_max=T_max,
        censored_at_T_max=n - len(exits),
        exit_times=[r.exit_time for r in exits if r.exit_time is not None],
        stopped_moment=mean,
        stopped_moment_se=se,
        stopped_moment_bound=moment_bound,
    )
