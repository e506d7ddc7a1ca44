"""
Weighted Inequality Checks

Poincare, Hardy, perturbation and substitution inequalities in the weight
space L^2(w^2 dx), w = v_x, plus the equivalence between that weighted
gradient and the V norm of u = h w.

h-type checks take a bounded h with bounded gradient on the full grid; the
half-line checks use its restriction to x >= 0.
"""

import logging
import math
from typing import Literal, Optional, Tuple

import numpy as np

from wavelab.checks.base_check import InequalityCheck, Sides
from wavelab.checks.test_functions import extremal_h0
from wavelab.core.grid_ops import FieldArray, Grid, gradient, integrate, integrate_half
from wavelab.core.wave_core import f_derivatives, tw_profile
from wavelab.utils.errors import PreconditionError
from wavelab.utils.schemas import IneqReport, ModelParams


logger = logging.getLogger(__name__)

# Points where w falls below this are dropped when recovering h = u / w.
W_FLOOR = 1e-300

# Largest |h(0)| accepted by the weighted Hardy check.
ORIGIN_TOLERANCE = 1e-12


def ground_state_split(grid: Grid, params: ModelParams, u: FieldArray) -> Tuple[FieldArray, FieldArray]:
    """
    Write u = h w.

    Returns:
        (h, h_x w) where h is zero wherever w < W_FLOOR and h_x w is formed
        without division as u_x - k (1 - 2v) u
    """
    v, w, _, _ = tw_profile(grid.points, params)
    h = np.zeros_like(u)
    mask = w >= W_FLOOR
    h[mask] = u[mask] / w[mask]
    weighted_grad = gradient(grid, u) - params.k * (1.0 - 2.0 * v) * u
    return h, weighted_grad


class _WeightedCheck(InequalityCheck):
    """Shared weighted integrals for h-type checks."""

    @property
    def input_kind(self) -> Literal["h", "u"]:
        return "h"

    def _derivative(self, h: FieldArray, h_x: Optional[FieldArray]) -> FieldArray:
        if h_x is None:
            return gradient(self.grid, h)
        self.grid.check(h_x)
        return h_x


class PoincareCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "poincare"

    @property
    def statement(self) -> str:
        return "int h^2 w^2 <= 4/(3k^2) int h_x^2 w^2 + 6/k (int h w^2)^2"

    def sides(self, field: FieldArray, h_x: Optional[FieldArray] = None) -> Sides:
        k = self.params.k
        w2 = self.w * self.w
        hx = self._derivative(field, h_x)
        lhs = integrate(self.grid, field * field * w2)
        grad = 4.0 / (3.0 * k * k) * integrate(self.grid, hx * hx * w2)
        proj = 6.0 / k * integrate(self.grid, field * w2) ** 2
        return Sides(lhs, grad + proj)


class PoincareCenteredCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "poincare_centered"

    @property
    def statement(self) -> str:
        return "int (h - h(0))^2 w^2 <= 4/(3k^2) int h_x^2 w^2"

    def sides(self, field: FieldArray) -> Sides:
        k = self.params.k
        w2 = self.w * self.w
        hx = gradient(self.grid, field)
        centered = field - field[self.grid.origin]
        lhs = integrate(self.grid, centered * centered * w2)
        rhs = 4.0 / (3.0 * k * k) * integrate(self.grid, hx * hx * w2)
        return Sides(lhs, rhs)


class HardyHalfLineCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "hardy_halfline"

    @property
    def statement(self) -> str:
        return "int_0^inf h^2 w^2 <= 1/k^2 int_0^inf h_x^2 w^2 + 12/k (int_0^inf h w^2)^2"

    def sides(self, field: FieldArray) -> Sides:
        k = self.params.k
        w2 = self.w * self.w
        hx = gradient(self.grid, field)
        lhs = integrate_half(self.grid, field * field * w2)
        grad = integrate_half(self.grid, hx * hx * w2) / (k * k)
        proj = 12.0 / k * integrate_half(self.grid, field * w2) ** 2
        return Sides(lhs, grad + proj)


class HardyPivotCheck(_WeightedCheck):
    """Half-line Hardy bound centred at x* where 6 v (1 - v) = 1 and v > 1/2."""

    V_PIVOT = 0.5 + 0.5 / math.sqrt(3.0)

    @property
    def name(self) -> str:
        return "hardy_pivot"

    @property
    def statement(self) -> str:
        return "int_0^inf (h - h(x*))^2 w^2 <= 1/k^2 int_0^inf h_x^2 w^2"

    @property
    def pivot(self) -> float:
        return math.log(self.V_PIVOT / (1.0 - self.V_PIVOT)) / self.params.k

    def sides(self, field: FieldArray) -> Sides:
        k = self.params.k
        w2 = self.w * self.w
        hx = gradient(self.grid, field)
        centered = field - float(np.interp(self.pivot, self.grid.points, field))
        lhs = integrate_half(self.grid, centered * centered * w2)
        rhs = integrate_half(self.grid, hx * hx * w2) / (k * k)
        return Sides(lhs, rhs)


class WeightedHardyCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "hardy_weighted"

    @property
    def statement(self) -> str:
        return "int_0^inf h^2 w_x^2 <= int_0^inf h_x^2 w^2 for h(0) = 0"

    def prepare(self, field: FieldArray) -> FieldArray:
        return field - field[self.grid.origin]

    def sides(self, field: FieldArray) -> Sides:
        """
        Raises:
            PreconditionError: if |h(0)| exceeds 1e-12
        """
        h0 = float(field[self.grid.origin])
        if abs(h0) > ORIGIN_TOLERANCE:
            raise PreconditionError(f"hardy_weighted needs h(0) = 0, got h(0) = {h0:.3e}")
        hx = gradient(self.grid, field)
        lhs = integrate_half(self.grid, field * field * self.w_x * self.w_x)
        rhs = integrate_half(self.grid, hx * hx * self.w * self.w)
        return Sides(lhs, rhs)


class HardyReflectedCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "hardy_reflected"

    @property
    def statement(self) -> str:
        return "int (h - h(0))^2 w_x^2 <= int h_x^2 w^2"

    def sides(self, field: FieldArray) -> Sides:
        hx = gradient(self.grid, field)
        centered = field - field[self.grid.origin]
        lhs = integrate(self.grid, centered * centered * self.w_x * self.w_x)
        rhs = integrate(self.grid, hx * hx * self.w * self.w)
        return Sides(lhs, rhs)


class PerturbationCheck(_WeightedCheck):
    @property
    def name(self) -> str:
        return "perturbation"

    @property
    def statement(self) -> str:
        return "|int h^2 w_x w| <= 1/k int h_x^2 w^2 + 6/k (int h w^2)^2"

    def sides(self, field: FieldArray) -> Sides:
        k = self.params.k
        w2 = self.w * self.w
        hx = gradient(self.grid, field)
        lhs = abs(integrate(self.grid, field * field * self.w_x * self.w))
        grad = integrate(self.grid, hx * hx * w2) / k
        proj = 6.0 / k * integrate(self.grid, field * w2) ** 2
        return Sides(lhs, grad + proj)


class SubstitutionFormCheck(_WeightedCheck):
    """Upper bound on the linearized form at u = h w in terms of h."""

    @property
    def name(self) -> str:
        return "substitution_form"

    @property
    def statement(self) -> str:
        return (
            "-nu int u_x^2 + b int f'(v) u^2 <= "
            "-2 min(a, 1-a) nu int h_x^2 w^2 + 6 |1-2a| nu (int h w^2)^2"
        )

    def sides(self, field: FieldArray) -> Sides:
        p = self.params
        w2 = self.w * self.w
        u = field * self.w
        ux = gradient(self.grid, u)
        hx = gradient(self.grid, field)
        fp, _, _ = f_derivatives(self.v, p.a)
        diffusion = p.nu * integrate(self.grid, ux * ux)
        reaction = p.b * integrate(self.grid, fp * u * u)
        lhs = -diffusion + reaction
        grad = 2.0 * min(p.a, 1.0 - p.a) * p.nu * integrate(self.grid, hx * hx * w2)
        proj = 6.0 * abs(1.0 - 2.0 * p.a) * p.nu * integrate(self.grid, field * w2) ** 2
        return Sides(lhs, -grad + proj)


class NormEquivalenceCheck(InequalityCheck):
    """V norm of u against the weighted gradient of h = u / w and the projection onto w."""

    @property
    def name(self) -> str:
        return "norm_equivalence"

    @property
    def statement(self) -> str:
        return "int u_x^2 + int u^2 <= q1 int h_x^2 w^2 + q2 <u, w>^2"

    @property
    def input_kind(self) -> Literal["h", "u"]:
        return "u"

    def sides(self, field: FieldArray) -> Sides:
        p = self.params
        h, weighted_grad = ground_state_split(self.grid, p, field)
        ux = gradient(self.grid, field)
        lhs = integrate(self.grid, ux * ux) + integrate(self.grid, field * field)
        grad = p.q1 * integrate(self.grid, weighted_grad * weighted_grad)
        proj = p.q2 * integrate(self.grid, h * self.w * self.w) ** 2
        return Sides(lhs, grad + proj)


# =============================================================================
# Functional entry points
# =============================================================================

def poincare_check(
    grid: Grid,
    params: ModelParams,
    h: FieldArray,
    h_x: Optional[FieldArray] = None,
    rel_tol: float = 1e-6,
) -> IneqReport:
    """Weighted Poincare inequality; pass h_x to use an analytic derivative."""
    check = PoincareCheck(grid, params, rel_tol)
    grid.check(h)
    return check.report(check.sides(h, h_x))


def poincare_extremal(grid: Grid, params: ModelParams, rel_tol: float = 1e-6) -> Tuple[FieldArray, IneqReport]:
    """
    Poincare check on the extremal function h0 with its analytic derivative.

    Equality holds for h0, so the slack is quadrature error only.
    """
    h0, h0_x = extremal_h0(grid, params)
    check = PoincareCheck(grid, params, rel_tol)
    report = check.report(check.sides(h0, h0_x), label="poincare_extremal")
    logger.debug(f"poincare_extremal slack={report.slack:.3e}")
    return h0, report


def extremal_moments(grid: Grid, params: ModelParams) -> Tuple[float, float, float]:
    """(int h0 w^2, int h0^2 w^2, int h0_x^2 w^2); exact values 0, k^2/3, k^4/4."""
    h0, h0_x = extremal_h0(grid, params)
    w = PoincareCheck(grid, params).w
    w2 = w * w
    return (
        integrate(grid, h0 * w2),
        integrate(grid, h0 * h0 * w2),
        integrate(grid, h0_x * h0_x * w2),
    )


def poincare_centered_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return PoincareCenteredCheck(grid, params, rel_tol).check(h)


def hardy_halfline_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return HardyHalfLineCheck(grid, params, rel_tol).check(h)


def hardy_pivot_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return HardyPivotCheck(grid, params, rel_tol).check(h)


def hardy_weighted_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    """
    Raises:
        PreconditionError: if |h(0)| > 1e-12
    """
    return WeightedHardyCheck(grid, params, rel_tol).check(h)


def hardy_reflected_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return HardyReflectedCheck(grid, params, rel_tol).check(h)


def perturbation_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return PerturbationCheck(grid, params, rel_tol).check(h)


def substitution_form_check(grid: Grid, params: ModelParams, h: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return SubstitutionFormCheck(grid, params, rel_tol).check(h)


def norm_equivalence_check(grid: Grid, params: ModelParams, u: FieldArray, rel_tol: float = 1e-6) -> IneqReport:
    return NormEquivalenceCheck(grid, params, rel_tol).check(u)
