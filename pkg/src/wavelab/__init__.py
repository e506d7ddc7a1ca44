"""
wavelab - stability laboratory for Nagumo travelling fronts

Numerical companion to the nonlinear stability analysis of the front
v(x) = 1 / (1 + exp(-k x)) of u_t = nu u_xx + b u (1 - u) (u - a):

- core: wave profile, derived constants and grid operators
- checks: the weighted inequality lab and its randomized suite
- simulation: deterministic and stochastic phase-tracking simulators
- harness: WaveLab orchestrator behind the ``wavelab`` command
"""

__version__ = "1.0.0"

from .core import Grid, derive_constants, tw_profile
from .harness import WaveLab

__all__ = [
    "__version__",
    "Grid",
    "derive_constants",
    "tw_profile",
    "WaveLab",
]
