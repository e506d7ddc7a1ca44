"""
Simulation package for wavelab

- DeterministicSimulator: IMEX stepping of the perturbation and phase ODE
- StochasticSimulator: Euler-Maruyama with multiplicative Q-Wiener noise
- exit_probability_mc: Monte Carlo exit probability against its bound
"""

from .dynamics import DeterministicSimulator, PhaseState, run_det
from .noise import NoiseModel, SigmaModel, sigma, compute_m_sqrtq, sample_increment
from .stochastic import StochasticSimulator, run_trial, exit_probability_mc

__all__ = [
    "DeterministicSimulator",
    "PhaseState",
    "run_det",
    "NoiseModel",
    "SigmaModel",
    "sigma",
    "compute_m_sqrtq",
    "sample_increment",
    "StochasticSimulator",
    "run_trial",
    "exit_probability_mc",
]
