"""
Centralized Pydantic Schemas for wavelab

This module defines the record types shared across the numerical kernel,
the inequality lab, the simulators and the harness. Using Pydantic models
keeps derived constants, reports and run records validated and gives every
output file one serialization path.
"""

import math
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


# =============================================================================
# Shared Type Definitions
# =============================================================================

TestFamily = Literal[
    "gaussian-bump",
    "shifted-wave-derivative",
    "random-fourier",
    "extremal-h0",
]

InitFamily = Literal["bump", "shifted-wave", "zero"]


# =============================================================================
# Model Parameters
# =============================================================================

class ModelParams(BaseModel):
    """Physical parameters of the Nagumo front and every derived constant."""

    model_config = ConfigDict(frozen=True)

    nu: float = Field(gt=0.0, description="Diffusion coefficient")
    b: float = Field(gt=0.0, description="Reaction strength")
    a: float = Field(gt=0.0, lt=1.0, description="Threshold of the cubic")
    m_factor: float = Field(ge=1.0, description="Phase relaxation rate in units of C_star")
    k: float = Field(description="Wave steepness sqrt(b / (2 nu))")
    c: float = Field(description="Wave speed sqrt(2 nu b) (1/2 - a)")
    eta: float = Field(description="sup of f'")
    kappa_star: float = Field(description="Spectral gap")
    C_star: float = Field(description="Projection constant 6 (nu + b)")
    c_star: float = Field(description="Exit radius in the H-norm")
    m: float = Field(description="Phase relaxation rate")

    @property
    def q1(self) -> float:
        """Gradient constant of the norm equivalence."""
        return 5.0 * (1.0 + self.nu / self.b)

    @property
    def q2(self) -> float:
        """Projection constant of the norm equivalence."""
        return 18.0 * math.sqrt(2.0 / (self.nu * self.b)) * (self.nu + self.b)

    def stability_radius(self, delta: float) -> float:
        """Largest initial H-norm covered by the decay estimate: delta kappa* / (b (4 + a))."""
        return delta * self.kappa_star / (self.b * (4.0 + self.a))

    def as_dict(self) -> Dict[str, float]:
        return self.model_dump()


# =============================================================================
# Inequality Lab Schemas
# =============================================================================

class IneqReport(BaseModel):
    """Both sides of one functional inequality and the signed slack rhs - lhs."""

    name: str = Field(description="Identifier of the inequality")
    lhs: float
    rhs: float
    slack: float = Field(description="rhs - lhs")
    tolerance: float = Field(ge=0.0)
    passed: bool = Field(serialization_alias="pass")
    seed: Optional[int] = None
    grid: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _pass_matches_slack(self) -> "IneqReport":
        if math.isfinite(self.slack) and self.passed != (self.slack >= -self.tolerance):
            raise ValueError("passed must equal slack >= -tolerance")
        return self

    @classmethod
    def from_sides(
        cls,
        name: str,
        lhs: float,
        rhs: float,
        rel_tol: float = 1e-6,
        seed: Optional[int] = None,
        grid: Optional[Dict[str, float]] = None,
    ) -> "IneqReport":
        """
        Build a report from the two sides of an inequality lhs <= rhs.

        The tolerance is rel_tol * max(|lhs|, |rhs|, 1e-12).
        """
        lhs = float(lhs)
        rhs = float(rhs)
        slack = rhs - lhs
        tolerance = rel_tol * max(abs(lhs), abs(rhs), 1e-12)
        passed = bool(math.isfinite(slack) and slack >= -tolerance)
        return cls(
            name=name,
            lhs=lhs,
            rhs=rhs,
            slack=slack,
            tolerance=tolerance,
            passed=passed,
            seed=seed,
            grid=grid or {},
        )

    @classmethod
    def failed(cls, name: str, seed: Optional[int] = None,
               grid: Optional[Dict[str, float]] = None) -> "IneqReport":
        """Fallback report for a check that raised; always fails."""
        return cls(
            name=name,
            lhs=float("nan"),
            rhs=float("nan"),
            slack=float("nan"),
            tolerance=0.0,
            passed=False,
            seed=seed,
            grid=grid or {},
        )

    def to_record(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "seed": self.seed,
            "grid": self.grid,
        }


class TestFunctionSpec(BaseModel):
    """Recipe for a test function h or u sampled on the grid."""

    __test__ = False  # not a pytest class

    family: TestFamily
    centers: List[float] = Field(default_factory=lambda: [0.0])
    widths: List[float] = Field(default_factory=lambda: [1.0])
    amplitudes: List[float] = Field(default_factory=lambda: [1.0])
    seed: Optional[int] = None
    n_modes: int = Field(default=20, ge=1)
    compact: bool = Field(
        default=False,
        description="Multiply by a smooth compactly supported cutoff",
    )

    @model_validator(mode="after")
    def _lengths_agree(self) -> "TestFunctionSpec":
        if self.family in ("gaussian-bump", "shifted-wave-derivative"):
            if not (len(self.centers) == len(self.widths) == len(self.amplitudes)):
                raise ValueError("centers, widths and amplitudes must have equal length")
        if any(w <= 0 for w in self.widths):
            raise ValueError("widths must be positive")
        return self


# =============================================================================
# Simulation Schemas
# =============================================================================

class DetTrajectory(BaseModel):
    """Sampled diagnostics of one deterministic run."""

    t: List[float] = Field(default_factory=list)
    norm_h: List[float] = Field(default_factory=list)
    norm_v: List[float] = Field(default_factory=list)
    C: List[float] = Field(default_factory=list)
    Cdot: List[float] = Field(default_factory=list)
    envelope: List[float] = Field(default_factory=list)
    lem0_envelope: List[float] = Field(default_factory=list)
    norm_u: List[float] = Field(default_factory=list)
    energy_residual: List[float] = Field(default_factory=list)
    front: List[float] = Field(default_factory=list)

    def rows(self) -> List[Dict[str, float]]:
        """One NDJSON-ready row per sample."""
        return [
            {
                "t": self.t[i],
                "norm_h": self.norm_h[i],
                "norm_v": self.norm_v[i],
                "C": self.C[i],
                "Cdot": self.Cdot[i],
                "envelope": self.envelope[i],
                "lem0_envelope": self.lem0_envelope[i],
                "norm_u": self.norm_u[i],
                "energy_residual": self.energy_residual[i],
                "front": self.front[i],
            }
            for i in range(len(self.t))
        ]


class TrialRecord(BaseModel):
    """Outcome of one stochastic trial."""

    trial_index: int = Field(ge=0)
    seed: str = Field(description="Entropy and spawn key of the trial stream")
    exited: bool
    exit_time: Optional[float] = None
    max_norm: float = Field(ge=0.0)
    stopped_norm_sq: float = Field(ge=0.0, description="||u~(T_max ^ T)||_H^2")
    final_C: float
    steps: int = Field(ge=0)


class ExitStats(BaseModel):
    """Monte Carlo estimate of P(T < infinity) against the exit bound."""

    n_trials: int = Field(ge=0)
    n_exits: int = Field(ge=0)
    p_hat: float = Field(ge=0.0, le=1.0)
    wilson_lo: float
    wilson_hi: float
    theorem_bound: float
    T_max: float
    censored_at_T_max: int = Field(ge=0)
    exit_times: List[float] = Field(default_factory=list)
    stopped_moment: float = 0.0
    stopped_moment_se: float = 0.0
    stopped_moment_bound: float = 0.0

    @model_validator(mode="after")
    def _counts_consistent(self) -> "ExitStats":
        if self.n_exits > self.n_trials:
            raise ValueError("n_exits cannot exceed n_trials")
        return self

    @property
    def bound_respected(self) -> bool:
        return self.wilson_lo <= self.theorem_bound

    @property
    def moment_respected(self) -> bool:
        return self.stopped_moment - 3.0 * self.stopped_moment_se <= self.stopped_moment_bound

    def summary_record(self) -> Dict[str, object]:
        return {
            "n_trials": self.n_trials,
            "n_exits": self.n_exits,
            "p_hat": self.p_hat,
            "wilson_lo": self.wilson_lo,
            "wilson_hi": self.wilson_hi,
            "theorem_bound": self.theorem_bound,
            "censored_at_T_max": self.censored_at_T_max,
            "T_max": self.T_max,
            "stopped_moment": self.stopped_moment,
            "stopped_moment_se": self.stopped_moment_se,
            "stopped_moment_bound": self.stopped_moment_bound,
        }


# =============================================================================
# Harness Schemas
# =============================================================================

class RunManifest(BaseModel):
    """Provenance record written before and finalized after each run."""

    subcommand: str
    status: Literal["running", "ok", "failed", "error"] = "running"
    config: Dict[str, Dict[str, object]] = Field(default_factory=dict)
    config_text: str = ""
    constants: Dict[str, float] = Field(default_factory=dict)
    code_version: str
    started_at: str
    finished_at: Optional[str] = None
    files: Dict[str, str] = Field(default_factory=dict, description="file name -> sha256")
    error: Optional[str] = None
    notes: List[str] = Field(default_factory=list)
