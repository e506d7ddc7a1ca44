"""
Travelling Wave Core

Closed-form Nagumo front, the cubic reaction term and the constants that
govern its stability. All wave derivatives are analytic; nothing here
differences on a grid.

The logistic profile is evaluated through scipy.special.expit so that
v (1 - v) keeps full relative precision far out in both tails.
"""

import math
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy.special import expit

from wavelab.utils.errors import ConfigurationError
from wavelab.utils.schemas import ModelParams


ArrayLike = Union[float, npt.NDArray[np.float64]]

# Third derivative of the cubic v (1 - v) (v - a).
F_THIRD = -6.0


def f(v: ArrayLike, a: float) -> ArrayLike:
    """Cubic reaction term v (1 - v) (v - a)."""
    return v * (1.0 - v) * (v - a)


def f_derivatives(v: ArrayLike, a: float) -> Tuple[ArrayLike, ArrayLike, float]:
    """
    Exact derivatives of the cubic.

    Returns:
        (f', f'', f''') where f''' is the constant -6
    """
    fp = -3.0 * v * v + 2.0 * (1.0 + a) * v - a
    fpp = -6.0 * v + 2.0 * (1.0 + a)
    return fp, fpp, F_THIRD


def reaction_increment(u: ArrayLike, v_ref: ArrayLike, a: float) -> ArrayLike:
    """
    G(u) = f(u + v_ref) - f(v_ref), expanded exactly as
    f'(v_ref) u + f''(v_ref) u^2 / 2 - u^3 so small u loses no digits.
    """
    fp, fpp, _ = f_derivatives(v_ref, a)
    return u * (fp + u * (0.5 * fpp - u))


def taylor_remainder(u: ArrayLike, v_ref: ArrayLike, a: float) -> ArrayLike:
    """Nonlinear part f''(v_ref) u^2 / 2 + f'''(v_ref) u^3 / 6 of G."""
    _, fpp, _ = f_derivatives(v_ref, a)
    return u * u * (0.5 * fpp + F_THIRD / 6.0 * u)


def eta_of(a: float) -> float:
    """sup over the reals of f', attained at v = (1 + a) / 3."""
    return (1.0 - a + a * a) / 3.0


def derive_constants(nu: float, b: float, a: float, m_factor: float = 2.0) -> ModelParams:
    """
    Derive every stability constant from the physical parameters.

    The spectral gap uses min(a, 1 - a); m is m_factor times C_star.

    Raises:
        ConfigurationError: if nu <= 0, b <= 0, a outside (0, 1) or m_factor < 1
    """
    if not (nu > 0.0 and math.isfinite(nu)):
        raise ConfigurationError(f"must be positive, got {nu}", key="model.nu")
    if not (b > 0.0 and math.isfinite(b)):
        raise ConfigurationError(f"must be positive, got {b}", key="model.b")
    if not 0.0 < a < 1.0:
        raise ConfigurationError(f"must lie in (0, 1), got {a}", key="model.a")
    if not m_factor >= 1.0:
        raise ConfigurationError(f"must be >= 1, got {m_factor}", key="model.m_factor")

    k = math.sqrt(b / (2.0 * nu))
    c = math.sqrt(2.0 * nu * b) * (0.5 - a)
    kappa_star = 0.4 * (nu * b / (nu + b)) * min(a, 1.0 - a)
    C_star = 6.0 * (nu + b)
    c_star = kappa_star / (2.0 * b * (4.0 + a))

    return ModelParams(
        nu=nu,
        b=b,
        a=a,
        m_factor=m_factor,
        k=k,
        c=c,
        eta=eta_of(a),
        kappa_star=kappa_star,
        C_star=C_star,
        c_star=c_star,
        m=m_factor * C_star,
    )


def tw_profile(x: ArrayLike, params: ModelParams) -> Tuple[ArrayLike, ArrayLike, ArrayLike, ArrayLike]:
    """
    Travelling wave and its first three derivatives at x.

    Args:
        x: Evaluation point(s)
        params: Model parameters (uses k only)

    Returns:
        (v, v_x, v_xx, v_xxx)
    """
    k = params.k
    z = k * np.asarray(x, dtype=float)
    v = expit(z)
    s = v * expit(-z)  # v (1 - v) without cancellation
    one_minus_2v = -np.tanh(0.5 * z)
    v_x = k * s
    v_xx = k * one_minus_2v * v_x
    v_xxx = k * k * (1.0 - 6.0 * s) * v_x
    if np.ndim(x) == 0:
        return float(v), float(v_x), float(v_xx), float(v_xxx)
    return v, v_x, v_xx, v_xxx


def wave(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """v^TW(x) alone."""
    return expit(params.k * np.asarray(x, dtype=float))


def wave_slope(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """w(x) = v_x = k v (1 - v)."""
    z = params.k * np.asarray(x, dtype=float)
    return params.k * expit(z) * expit(-z)


def eigen_residual(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """nu v_xxx + b f'(v) v_x - c v_xx, zero for the exact front."""
    v, v_x, v_xx, v_xxx = tw_profile(x, params)
    fp, _, _ = f_derivatives(v, params.a)
    return params.nu * v_xxx + params.b * fp * v_x - params.c * v_xx


def ground_state_residual(x: ArrayLike, params: ModelParams) -> ArrayLike:
    """
    Relative residual of d/dx(w_x w^{-3/2}) = -(k^2/2) w^{-1/2}.

    The left side is expanded with the product rule, w_xx w^{-3/2}
    - (3/2) w_x^2 w^{-5/2}, using analytic derivatives; the result is divided
    by (k^2/2) w^{-1/2}.
    """
    _, w, w_x, w_xx = tw_profile(x, params)
    target = -0.5 * params.k ** 2 * w ** -0.5
    lhs = w_xx * w ** -1.5 - 1.5 * w_x ** 2 * w ** -2.5
    return (lhs - target) / np.abs(target)


def plateau_distance_norm_sq(params: ModelParams) -> float:
    """||v^TW ^ (1 - v^TW)||_H^2 = (2 ln 2 - 1) / k."""
    return (2.0 * math.log(2.0) - 1.0) / params.k


def shifted_wave_slope_norm_sq(params: ModelParams) -> float:
    """||v_x||_H^2 = k / 6."""
    return params.k / 6.0
