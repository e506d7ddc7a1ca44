"""
Inequality Suite

Runs every check on its closed-form reference cases and on randomized test
functions. Random draws fan out over a thread pool; each task gets its own
seed derived from (master_seed, check index, draw index), so a report can be
reproduced from the seed it carries.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence

import numpy as np

from wavelab.checks.base_check import InequalityCheck
from wavelab.checks.form_checks import SpectralGapCheck, form_bounds_check
from wavelab.checks.test_functions import RANDOM_FAMILIES, build_field, draw_spec
from wavelab.checks.weighted_checks import (
    HardyHalfLineCheck,
    HardyPivotCheck,
    HardyReflectedCheck,
    NormEquivalenceCheck,
    PerturbationCheck,
    PoincareCenteredCheck,
    PoincareCheck,
    SubstitutionFormCheck,
    WeightedHardyCheck,
    extremal_moments,
    poincare_extremal,
)
from wavelab.core.grid_ops import Grid
from wavelab.core.wave_core import eigen_residual, ground_state_residual, wave_slope
from wavelab.simulation.dynamics import phase_lipschitz_check
from wavelab.utils.schemas import IneqReport, ModelParams


logger = logging.getLogger(__name__)

# Index used for the (u, u2, phase) draws of the form bounds.
FORM_BOUNDS_INDEX = 100


def task_seed(master_seed: int, check_index: int, draw: int) -> int:
    """Deterministic 32-bit seed for one randomized draw."""
    return int(np.random.SeedSequence([master_seed, check_index, draw]).generate_state(1)[0])


def build_checks(grid: Grid, params: ModelParams, rel_tol: float = 1e-6) -> List[InequalityCheck]:
    """All single-input checks, in report order."""
    classes = [
        PoincareCheck,
        PoincareCenteredCheck,
        HardyHalfLineCheck,
        HardyPivotCheck,
        WeightedHardyCheck,
        HardyReflectedCheck,
        PerturbationCheck,
        SubstitutionFormCheck,
        NormEquivalenceCheck,
        SpectralGapCheck,
    ]
    return [cls(grid, params, rel_tol) for cls in classes]


def _absolute(name: str, error: float, allowed: float, grid: Grid) -> IneqReport:
    return IneqReport.from_sides(name, lhs=error, rhs=allowed, rel_tol=0.0, grid=grid.describe())


def reference_reports(grid: Grid, params: ModelParams, rel_tol: float = 1e-6) -> List[IneqReport]:
    """
    Closed-form cases: wave identities, equality cases with h = 1, the
    extremal function h0 and the translation mode u = w.
    """
    k = params.k
    x = grid.points
    checks = {c.name: c for c in build_checks(grid, params, rel_tol)}
    ones = np.ones(grid.n)
    w = wave_slope(x, params)

    eigen = float(np.max(np.abs(eigen_residual(x, params))))
    ground = float(np.max(np.abs(ground_state_residual(x, params))))

    _, extremal = poincare_extremal(grid, params, rel_tol)
    first, second, grad = extremal_moments(grid, params)

    reports = [
        _absolute("eigen_relation", eigen, 1e-10, grid),
        _absolute("ground_state_identity", ground, 1e-10, grid),
        checks["poincare"].check(ones, label="poincare/constant"),
        extremal,
        _absolute("poincare_extremal/sharpness", abs(extremal.slack), 1e-4 * k * k / 3.0, grid),
        _absolute("poincare_extremal/orthogonality", abs(first), 1e-8, grid),
        _absolute("poincare_extremal/weighted_mass", abs(second - k * k / 3.0), 1e-6, grid),
        _absolute("poincare_extremal/weighted_gradient", abs(grad - k ** 4 / 4.0), 1e-6, grid),
        checks["hardy_halfline"].check(ones, label="hardy_halfline/constant"),
        checks["hardy_weighted"].check(np.tanh(k * x), label="hardy_weighted/tanh"),
        checks["perturbation"].check(np.exp(-0.5 * (k * x) ** 2), label="perturbation/even"),
        checks["substitution_form"].check(ones, label="substitution_form/constant"),
        checks["norm_equivalence"].check(w, label="norm_equivalence/wave_slope"),
        checks["spectral_gap"].check(w, label="spectral_gap/translation_mode"),
        phase_lipschitz_check(grid, params, grid.zeros(), t=0.0, seed=0, rel_tol=rel_tol),
        phase_lipschitz_check(grid, params, 1e-2 * w, t=5.0, seed=1, rel_tol=rel_tol),
    ]
    return reports


def _guarded(label: str, seed: int, grid: Grid, fn: Callable[[], List[IneqReport]]) -> List[IneqReport]:
    try:
        return fn()
    except Exception as e:
        logger.error(f"{label} failed for seed {seed}: {e}")
        return [IneqReport.failed(label, seed=seed, grid=grid.describe())]


def _single_draw(check: InequalityCheck, check_index: int, master_seed: int, draw: int) -> List[IneqReport]:
    seed = task_seed(master_seed, check_index, draw)
    family = RANDOM_FAMILIES[draw % len(RANDOM_FAMILIES)]
    label = f"{check.name}/{family}"

    def run() -> List[IneqReport]:
        rng = np.random.default_rng(seed)
        spec = draw_spec(rng, family, check.params, compact=check.input_kind == "u")
        field = check.prepare(build_field(check.grid, check.params, spec))
        return [check.check(field, seed=seed, label=label)]

    return _guarded(label, seed, check.grid, run)


def _form_draw(grid: Grid, params: ModelParams, master_seed: int, draw: int, rel_tol: float) -> List[IneqReport]:
    seed = task_seed(master_seed, FORM_BOUNDS_INDEX, draw)

    def run() -> List[IneqReport]:
        rng = np.random.default_rng(seed)
        fields = []
        for _ in range(2):
            family = RANDOM_FAMILIES[int(rng.integers(len(RANDOM_FAMILIES)))]
            fields.append(build_field(grid, params, draw_spec(rng, family, params, compact=True)))
        phase = float(rng.uniform(-4.0, 4.0) / params.k)
        return form_bounds_check(grid, params, fields[0], fields[1], phase, rel_tol, seed=seed)

    return _guarded("form_bounds", seed, grid, run)


def run_suite(
    grid: Grid,
    params: ModelParams,
    n_random: int = 1000,
    master_seed: int = 20130512,
    rel_tol: float = 1e-6,
    workers: Optional[int] = None,
) -> List[IneqReport]:
    """
    Reference cases followed by ``n_random`` random draws per check and
    ``n_random`` (u, u2, phase) draws for the form bounds.

    A draw that raises is logged and replaced by a failing report, so one bad
    sample never hides the rest of the sweep.
    """
    reports = reference_reports(grid, params, rel_tol)
    checks = build_checks(grid, params, rel_tol)

    tasks: List[Callable[[], List[IneqReport]]] = []
    for index, check in enumerate(checks):
        for draw in range(n_random):
            tasks.append(lambda c=check, i=index, d=draw: _single_draw(c, i, master_seed, d))
    for draw in range(n_random):
        tasks.append(lambda d=draw: _form_draw(grid, params, master_seed, d, rel_tol))

    logger.info(f"Running {len(tasks)} randomized draws over {len(checks) + 3} inequalities")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for batch in pool.map(lambda task: task(), tasks):
            reports.extend(batch)

    failures = count_failures(reports)
    if failures:
        logger.warning(f"{failures} of {len(reports)} inequality reports failed")
    return reports


def count_failures(reports: Sequence[IneqReport]) -> int:
    return sum(1 for r in reports if not r.passed)


def worst_slack(reports: Sequence[IneqReport]) -> float:
    """Smallest slack relative to its tolerance scale, ignoring failed fallbacks."""
    worst = math.inf
    for r in reports:
        if math.isfinite(r.slack):
            worst = min(worst, r.slack / max(abs(r.lhs), abs(r.rhs), 1e-12))
    return worst
