"""
Base Check for the wavelab inequality lab

This module provides an abstract base class for all functional-inequality
checks, implementing the shared wave tables and report construction and
enforcing a consistent interface.
"""

from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Literal, NamedTuple, Optional, Tuple

from wavelab.core.grid_ops import FieldArray, Grid
from wavelab.core.wave_core import tw_profile
from wavelab.utils.schemas import IneqReport, ModelParams


class Sides(NamedTuple):
    """Left and right side of lhs <= rhs."""

    lhs: float
    rhs: float


class InequalityCheck(ABC):
    """
    Abstract base class for all inequality checks.

    Provides common functionality for:
    - Wave tables (v, w = v_x, w_x) on the check's grid, cached per (grid, k)
    - Turning computed sides into an IneqReport with the tolerance policy

    Subclasses must implement:
    - name: Identifier used in reports
    - statement: Human-readable form of the inequality
    - input_kind: "h" (bounded weight-space function) or "u" (compact field)
    - sides: Both sides of the inequality for one input
    """

    # Class-level wave-table cache shared across all check instances, oldest entry evicted first
    _table_cache: ClassVar[Dict[Tuple[float, int, float], Tuple[FieldArray, FieldArray, FieldArray]]] = {}
    _table_cache_size: ClassVar[int] = 8

    def __init__(self, grid: Grid, params: ModelParams, rel_tol: float = 1e-6) -> None:
        """
        Args:
            grid: Grid the test functions are sampled on
            params: Model parameters and derived constants
            rel_tol: Relative tolerance of the pass predicate
        """
        self.grid = grid
        self.params = params
        self.rel_tol = rel_tol
        self.v, self.w, self.w_x = self._wave_tables()

    @property
    @abstractmethod
    def name(self) -> str:
        """Identifier of the inequality (e.g. 'poincare')."""
        ...

    @property
    @abstractmethod
    def statement(self) -> str:
        """The inequality in words and symbols."""
        ...

    @property
    @abstractmethod
    def input_kind(self) -> Literal["h", "u"]:
        """Which test-function class the check takes."""
        ...

    @abstractmethod
    def sides(self, field: FieldArray) -> Sides:
        """Evaluate both sides for one sampled input."""
        ...

    def prepare(self, field: FieldArray) -> FieldArray:
        """Adapt a raw random sample to the check's precondition (identity by default)."""
        return field

    def _wave_tables(self) -> Tuple[FieldArray, FieldArray, FieldArray]:
        key = (self.grid.half_width, self.grid.n, self.params.k)
        if key not in self._table_cache:
            v, w, w_x, _ = tw_profile(self.grid.points, self.params)
            while len(self._table_cache) >= self._table_cache_size:
                del self._table_cache[next(iter(self._table_cache))]
            self._table_cache[key] = (v, w, w_x)
        return self._table_cache[key]

    def report(self, computed: Sides, seed: Optional[int] = None, label: Optional[str] = None) -> IneqReport:
        return IneqReport.from_sides(
            name=label or self.name,
            lhs=computed.lhs,
            rhs=computed.rhs,
            rel_tol=self.rel_tol,
            seed=seed,
            grid=self.grid.describe(),
        )

    def check(self, field: FieldArray, seed: Optional[int] = None, label: Optional[str] = None) -> IneqReport:
        """
        Run the check on one input.

        Args:
            field: Sampled h or u on the check's grid
            seed: Seed that produced the input, recorded in the report
            label: Report name override (defaults to ``name``)

        Returns:
            IneqReport with the signed slack rhs - lhs

        Raises:
            ShapeError: if the field does not match the grid
        """
        self.grid.check(field)
        return self.report(self.sides(field), seed=seed, label=label)
