"""
Form Checks

Quadratic-form bounds on compactly supported perturbations u: the spectral
gap of the linearization around the front, and the monotonicity, coercivity
and remainder bounds of the reaction-diffusion operator around a shifted
front v(. + phase).

The diffusion term enters through the discrete bilinear form <Delta_h u, u>
so the bounds are checked for the operator the time steppers actually use.
"""

from typing import List, Literal, Optional

from wavelab.checks.base_check import InequalityCheck, Sides
from wavelab.core.grid_ops import (
    FieldArray,
    Grid,
    dirichlet_energy,
    gradient,
    inner_h,
    integrate,
    laplacian,
    norm_h,
    norm_v,
)
from wavelab.core.wave_core import f, f_derivatives, reaction_increment, taylor_remainder, wave
from wavelab.utils.schemas import IneqReport, ModelParams


class _FormCheck(InequalityCheck):
    """u-type check evaluated around the front shifted by ``phase``."""

    def __init__(self, grid: Grid, params: ModelParams, rel_tol: float = 1e-6, phase: float = 0.0) -> None:
        super().__init__(grid, params, rel_tol)
        self.phase = phase
        self.v_shift = wave(grid.points + phase, params)

    @property
    def input_kind(self) -> Literal["h", "u"]:
        return "u"


class SpectralGapCheck(_FormCheck):
    """Linearized form bounded by -kappa* ||u||_V^2 plus the projection onto w."""

    @property
    def name(self) -> str:
        return "spectral_gap"

    @property
    def statement(self) -> str:
        return "-nu int u_x^2 + b int f'(v) u^2 <= -kappa* ||u||_V^2 + C* <u, w>^2"

    def sides(self, field: FieldArray) -> Sides:
        p = self.params
        ux = gradient(self.grid, field)
        fp, _, _ = f_derivatives(self.v, p.a)
        diffusion = p.nu * integrate(self.grid, ux * ux)
        reaction = p.b * integrate(self.grid, fp * field * field)
        gap = p.kappa_star * norm_v(self.grid, field) ** 2
        proj = p.C_star * inner_h(self.grid, field, self.w) ** 2
        return Sides(-diffusion + reaction, -gap + proj)


class MonotonicityCheck(_FormCheck):
    """
    <nu Delta e + b (G(u) - G(u2)), e> <= b eta ||e||^2 with e = u - u2.

    ``sides`` alone compares against u2 = 0.
    """

    @property
    def name(self) -> str:
        return "monotonicity"

    @property
    def statement(self) -> str:
        return "<nu Delta (u - u2) + b (G(u) - G(u2)), u - u2> <= b eta ||u - u2||^2"

    def sides(self, field: FieldArray, partner: Optional[FieldArray] = None) -> Sides:
        p = self.params
        other = self.grid.zeros() if partner is None else partner
        self.grid.check(other)
        e = field - other
        diffusion = p.nu * dirichlet_energy(self.grid, e)
        reaction = p.b * inner_h(self.grid, f(field + self.v_shift, p.a) - f(other + self.v_shift, p.a), e)
        rhs = p.b * p.eta * inner_h(self.grid, e, e)
        return Sides(-diffusion + reaction, rhs)


class CoercivityCheck(_FormCheck):
    @property
    def name(self) -> str:
        return "coercivity"

    @property
    def statement(self) -> str:
        return "<nu Delta u + b G(u), u> <= -nu ||u||_V^2 + (b eta + nu) ||u||^2"

    def sides(self, field: FieldArray) -> Sides:
        p = self.params
        ux = gradient(self.grid, field)
        diffusion = p.nu * dirichlet_energy(self.grid, field)
        reaction = p.b * inner_h(self.grid, reaction_increment(field, self.v_shift, p.a), field)
        grad = p.nu * integrate(self.grid, ux * ux)
        mass = p.b * p.eta * inner_h(self.grid, field, field)
        return Sides(-diffusion + reaction, -grad + mass)


class RemainderCheck(_FormCheck):
    @property
    def name(self) -> str:
        return "remainder"

    @property
    def statement(self) -> str:
        return "<f''(v) u^2 / 2 + f'''(v) u^3 / 6, u> <= (4 + a) ||u||^2 ||u||_V"

    def sides(self, field: FieldArray) -> Sides:
        p = self.params
        lhs = inner_h(self.grid, taylor_remainder(field, self.v_shift, p.a), field)
        rhs = (4.0 + p.a) * norm_h(self.grid, field) ** 2 * norm_v(self.grid, field)
        return Sides(lhs, rhs)


# =============================================================================
# Functional entry points
# =============================================================================

def spectral_gap_check(grid: Grid, params: ModelParams, u: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return SpectralGapCheck(grid, params, rel_tol).check(u)


def form_bounds_check(
    grid: Grid,
    params: ModelParams,
    u: FieldArray,
    u2: FieldArray,
    phase: float = 0.0,
    rel_tol: float = 1e-6,
    seed: Optional[int] = None,
) -> List[IneqReport]:
    """
    Monotonicity on (u, u2), then coercivity and remainder on u, all around
    the front shifted by ``phase``.

    Returns:
        [monotonicity, coercivity, remainder] reports
    """
    grid.check(u, u2)
    mono = MonotonicityCheck(grid, params, rel_tol, phase)
    return [
        mono.report(mono.sides(u, u2), seed=seed),
        CoercivityCheck(grid, params, rel_tol, phase).check(u, seed=seed),
        RemainderCheck(grid, params, rel_tol, phase).check(u, seed=seed),
    ]
