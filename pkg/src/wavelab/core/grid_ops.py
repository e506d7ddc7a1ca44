"""
Grid Operations

Uniform truncated grid on [-L, L], trapezoid quadrature, the discrete H and
V norms and the implicit diffusion solve shared by both time steppers.

Fields are plain float64 numpy arrays aligned with a Grid.
"""

from typing import Dict, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator
from scipy.integrate import trapezoid
from scipy.linalg import solve_banded

from wavelab.utils.errors import ShapeError
from wavelab.utils.schemas import ModelParams


FieldArray = npt.NDArray[np.float64]


class Grid(BaseModel):
    """
    Uniform grid x_i = -L + i dx, i = 0..n-1, with dx = 2L / (n - 1).

    n is odd so that x = 0 is the grid point with index n // 2.
    """

    model_config = ConfigDict(frozen=True)

    half_width: float = Field(gt=0.0)
    n: int = Field(ge=3)

    _points: FieldArray = PrivateAttr()
    _weights: FieldArray = PrivateAttr()

    @field_validator("n")
    @classmethod
    def _odd(cls, n: int) -> int:
        if n % 2 == 0:
            raise ValueError("n must be odd so that x = 0 is a grid point")
        return n

    def model_post_init(self, __context: object) -> None:
        self._points = np.linspace(-self.half_width, self.half_width, self.n)
        self._points[self.n // 2] = 0.0
        weights = np.full(self.n, self.dx)
        weights[0] = weights[-1] = 0.5 * self.dx
        self._weights = weights

    @classmethod
    def for_params(cls, params: ModelParams, L_factor: float = 40.0, n: int = 4001) -> "Grid":
        """Grid with half width L_factor / k."""
        return cls(half_width=L_factor / params.k, n=n)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def points(self) -> FieldArray:
        return self._points

    @property
    def weights(self) -> FieldArray:
        """Trapezoid weights: dx inside, dx/2 at both ends."""
        return self._weights

    @property
    def origin(self) -> int:
        """Index of x = 0."""
        return self.n // 2

    def describe(self) -> Dict[str, float]:
        return {"L": self.half_width, "n": self.n}

    def zeros(self) -> FieldArray:
        return np.zeros(self.n)

    def check(self, *fields: FieldArray) -> None:
        """
        Raises:
            ShapeError: if any field is not a 1-D array of length n
        """
        for fld in fields:
            if np.ndim(fld) != 1 or len(fld) != self.n:
                raise ShapeError(
                    f"field of shape {np.shape(fld)} does not match grid with n={self.n}"
                )


# =============================================================================
# Quadrature and norms
# =============================================================================

def integrate(grid: Grid, field: FieldArray) -> float:
    """Composite trapezoid value of the integral over [-L, L]."""
    grid.check(field)
    return float(trapezoid(field, dx=grid.dx))


def integrate_half(grid: Grid, field: FieldArray) -> float:
    """Trapezoid integral over [0, L]."""
    grid.check(field)
    return float(trapezoid(field[grid.origin:], dx=grid.dx))


def inner_h(grid: Grid, f: FieldArray, g: FieldArray) -> float:
    grid.check(f, g)
    return float(trapezoid(f * g, dx=grid.dx))


def norm_h(grid: Grid, f: FieldArray) -> float:
    return float(np.sqrt(max(inner_h(grid, f, f), 0.0)))


def gradient(grid: Grid, f: FieldArray) -> FieldArray:
    """Centered differences inside, second-order one-sided at the ends."""
    grid.check(f)
    return np.gradient(f, grid.dx, edge_order=2)


def norm_v(grid: Grid, f: FieldArray) -> float:
    """sqrt(||f_x||^2 + ||f||^2) with the difference gradient."""
    g = gradient(grid, f)
    return float(np.sqrt(inner_h(grid, g, g) + inner_h(grid, f, f)))


def laplacian(grid: Grid, f: FieldArray) -> FieldArray:
    """
    Standard second difference at interior points; zero on the two boundary
    rows, which carry the Dirichlet values.
    """
    grid.check(f)
    out = np.zeros_like(f)
    out[1:-1] = (f[:-2] - 2.0 * f[1:-1] + f[2:]) / grid.dx ** 2
    return out


def dirichlet_energy(grid: Grid, f: FieldArray) -> float:
    """
    -<Delta_h f, f> under the trapezoid rule.

    Equals the forward-difference sum dx sum (f_{i+1} - f_i)^2 / dx^2 when f
    vanishes at both ends, so it is the discrete counterpart of ||f_x||^2
    that the implicit solve dissipates.
    """
    return -inner_h(grid, laplacian(grid, f), f)


# =============================================================================
# Implicit diffusion
# =============================================================================

def diffusion_banded(grid: Grid, coeff: float) -> FieldArray:
    """Banded storage of I - coeff Delta_h with identity boundary rows."""
    r = coeff / grid.dx ** 2
    ab = np.zeros((3, grid.n))
    ab[0, 2:] = -r           # upper diagonal, rows 1..n-2
    ab[1, :] = 1.0 + 2.0 * r
    ab[1, 0] = ab[1, -1] = 1.0
    ab[2, :-2] = -r          # lower diagonal, rows 1..n-2
    return ab


def apply_diffusion_operator(grid: Grid, f: FieldArray, coeff: float) -> FieldArray:
    """(I - coeff Delta_h) f."""
    return f - coeff * laplacian(grid, f)


def diffusion_solve(
    grid: Grid,
    field: FieldArray,
    coeff: float,
    banded: Optional[FieldArray] = None,
) -> FieldArray:
    """
    Solve (I - coeff Delta_h) out = field with a tridiagonal direct solve.

    The boundary rows are identity rows, so out takes the field's values at
    x = -L and x = L (zero for the perturbation unknown).

    Args:
        grid: Grid the field lives on
        field: Right-hand side
        coeff: nu * dt, must be >= 0
        banded: Optional precomputed ``diffusion_banded(grid, coeff)``
    """
    grid.check(field)
    if coeff < 0.0:
        raise ValueError(f"diffusion coefficient must be >= 0, got {coeff}")
    if coeff == 0.0:
        return np.array(field, dtype=float, copy=True)
    ab = diffusion_banded(grid, coeff) if banded is None else banded
    return solve_banded((1, 1), ab, field, check_finite=False)
