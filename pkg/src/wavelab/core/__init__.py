"""
Numerical kernel: the closed-form front and the grid it is sampled on.
"""

from .wave_core import (
    f,
    f_derivatives,
    derive_constants,
    tw_profile,
    wave,
    wave_slope,
)
from .grid_ops import (
    Grid,
    integrate,
    inner_h,
    norm_h,
    norm_v,
    gradient,
    diffusion_solve,
)

__all__ = [
    "f",
    "f_derivatives",
    "derive_constants",
    "tw_profile",
    "wave",
    "wave_slope",
    "Grid",
    "integrate",
    "inner_h",
    "norm_h",
    "norm_v",
    "gradient",
    "diffusion_solve",
]
