"""
Noise Model

Square-root covariance kernel of the Q-Wiener process on the grid, the
multiplicative dispersion sigma and the Hilbert-Schmidt diagnostics that
bound the stochastic forcing.

The default kernel is the gaussian eps_Q exp(-(x - y)^2 / (2 ell^2)). It is
translation invariant, so K xi dx is applied as a truncated convolution via
scipy.signal.fftconvolve; any other kernel is assembled into a dense matrix.
"""

import logging
import math
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

from wavelab.core.grid_ops import FieldArray, Grid
from wavelab.core.wave_core import ArrayLike
from wavelab.utils.errors import ConfigurationError
from wavelab.utils.schemas import IneqReport


logger = logging.getLogger(__name__)

KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Gaussian stencil is cut at this many correlation lengths.
STENCIL_RADIUS = 12.0


class NoiseModel(BaseModel):
    """
    Square-root covariance kernel k(x, y) sampled on a grid.

    Leave ``kernel`` unset for the gaussian family with amplitude epsilon_Q
    and correlation length ell.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    epsilon_Q: float = Field(default=1.0, ge=0.0)
    ell: float = Field(default=1.0, gt=0.0)
    kernel: Optional[KernelFn] = None

    _matrix: Optional[np.ndarray] = PrivateAttr(default=None)

    @property
    def is_gaussian(self) -> bool:
        return self.kernel is None

    def evaluate(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """k(x, y) with numpy broadcasting."""
        if self.kernel is not None:
            return np.asarray(self.kernel(x, y), dtype=float)
        return self.epsilon_Q * np.exp(-0.5 * ((x - y) / self.ell) ** 2)

    @property
    def stencil(self) -> FieldArray:
        """Gaussian kernel on offsets -m dx .. m dx, m covering STENCIL_RADIUS ell."""
        dx = self.grid.dx
        m = min(self.grid.n - 1, int(math.ceil(STENCIL_RADIUS * self.ell / dx)))
        offsets = dx * np.arange(-m, m + 1)
        return self.epsilon_Q * np.exp(-0.5 * (offsets / self.ell) ** 2)

    def kernel_matrix(self) -> np.ndarray:
        """Dense K_ij = k(x_i, x_j); n x n, built once per model."""
        if self._matrix is None:
            x = self.grid.points
            logger.debug("Assembling dense %dx%d noise kernel", x.size, x.size)
            self._matrix = self.evaluate(x[:, None], x[None, :])
        return self._matrix

    def apply(self, field: FieldArray) -> FieldArray:
        """(K field) dx, i.e. the quadrature of int k(x_i, y) field(y) dy without end weights."""
        self.grid.check(field)
        if self.is_gaussian:
            return fftconvolve(field, self.stencil, mode="same") * self.grid.dx
        return self.kernel_matrix() @ field * self.grid.dx

    def row_mass(self) -> FieldArray:
        """int k(x_i, y)^2 dy for every grid point, by trapezoid quadrature."""
        weights = self.grid.weights
        if self.is_gaussian:
            return fftconvolve(weights, self.stencil ** 2, mode="same")
        return (self.kernel_matrix() ** 2) @ weights


class SigmaModel(BaseModel):
    """sigma(v) = epsilon_sigma c (1 - c) with c = clip(v, 0, 1)."""

    model_config = ConfigDict(frozen=True)

    epsilon_sigma: float = Field(default=0.0, ge=0.0)

    @property
    def lipschitz(self) -> float:
        return self.epsilon_sigma

    def __call__(self, v: FieldArray) -> FieldArray:
        return sigma(v, self.epsilon_sigma)


def sigma(v: ArrayLike, epsilon_sigma: float) -> ArrayLike:
    """Dispersion vanishing at the rest states 0 and 1; Lipschitz with constant epsilon_sigma."""
    c = np.clip(v, 0.0, 1.0)
    return epsilon_sigma * c * (1.0 - c)


def compute_m_sqrtq(noise: NoiseModel, quadrature: bool = False) -> float:
    """
    M = sup_x int k(x, y)^2 dy.

    Closed form eps_Q^2 ell sqrt(pi) for the gaussian family, unless
    ``quadrature`` asks for the grid maximum of the row integrals (always
    used for custom kernels).

    Raises:
        ConfigurationError: if a kernel row is not finite
    """
    if noise.is_gaussian and not quadrature:
        return noise.epsilon_Q ** 2 * noise.ell * math.sqrt(math.pi)

    grid = noise.grid
    if noise.is_gaussian:
        x = grid.points
        rows = np.array([trapezoid(noise.evaluate(xi, x) ** 2, dx=grid.dx) for xi in x])
    else:
        rows = noise.row_mass()
    if not np.all(np.isfinite(rows)):
        raise ConfigurationError("kernel rows are not square integrable on the grid", key="noise.kernel")
    return float(np.max(rows))


def sample_increment(noise: NoiseModel, dt: float, rng: np.random.Generator) -> FieldArray:
    """
    Grid realization of sqrt(Q) dW: K xi dx with xi_i ~ N(0, dt/dx).

    Its covariance is dt dx sum_m K_im K_jm ~ dt int k(x_i, y) k(x_j, y) dy.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return noise.grid.zeros()
    xi = rng.standard_normal(noise.grid.n) * math.sqrt(dt / noise.grid.dx)
    return noise.apply(xi)


# =============================================================================
# Hilbert-Schmidt diagnostics
# =============================================================================

def hs_norm_sq(noise: NoiseModel, sigma_model: SigmaModel, v_field: FieldArray) -> float:
    """||sigma(v) sqrt(Q)||_HS^2 = int sigma(v(x))^2 int k(x, y)^2 dy dx."""
    s = sigma_model(v_field)
    return float(trapezoid(s * s * noise.row_mass(), dx=noise.grid.dx))


def hs_lipschitz_sq(noise: NoiseModel, sigma_model: SigmaModel, v1: FieldArray, v2: FieldArray) -> float:
    """||(sigma(v1) - sigma(v2)) sqrt(Q)||_HS^2."""
    d = sigma_model(v1) - sigma_model(v2)
    return float(trapezoid(d * d * noise.row_mass(), dx=noise.grid.dx))


def hs_bound_check(
    noise: NoiseModel,
    sigma_model: SigmaModel,
    u_tilde: FieldArray,
    v_shift: FieldArray,
    m_sqrtq: float,
    rel_tol: float = 1e-6,
) -> IneqReport:
    """||Sigma~(u~)||_HS^2 <= 2 M Lip^2 (||u~||^2 + ||v ^ (1 - v)||^2) around the front v_shift."""
    grid = noise.grid
    lhs = hs_norm_sq(noise, sigma_model, u_tilde + v_shift)
    plateau = np.minimum(v_shift, 1.0 - v_shift)
    rhs = 2.0 * m_sqrtq * sigma_model.lipschitz ** 2 * (
        trapezoid(u_tilde * u_tilde, dx=grid.dx) + trapezoid(plateau * plateau, dx=grid.dx)
    )
    return IneqReport.from_sides("hs_bound", lhs, rhs, rel_tol=rel_tol, grid=grid.describe())


def hs_lipschitz_check(
    noise: NoiseModel,
    sigma_model: SigmaModel,
    v1: FieldArray,
    v2: FieldArray,
    m_sqrtq: float,
    rel_tol: float = 1e-6,
) -> IneqReport:
    """||(Sigma(v1) - Sigma(v2))||_HS^2 <= M Lip^2 ||v1 - v2||^2."""
    grid = noise.grid
    lhs = hs_lipschitz_sq(noise, sigma_model, v1, v2)
    d = v1 - v2
    rhs = m_sqrtq * sigma_model.lipschitz ** 2 * trapezoid(d * d, dx=grid.dx)
    return IneqReport.from_sides("hs_lipschitz", lhs, rhs, rel_tol=rel_tol, grid=grid.describe())
