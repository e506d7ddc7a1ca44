"""
Checks package for wavelab

This package provides the inequality lab:
- InequalityCheck: Abstract base class for all checks
- Weighted checks: Poincare, Hardy, perturbation, substitution, norm equivalence
- Form checks: spectral gap, monotonicity, coercivity, remainder
- run_suite: reference cases plus randomized sweeps over every check
"""

from .base_check import InequalityCheck
from .weighted_checks import (
    poincare_check,
    poincare_extremal,
    poincare_centered_check,
    hardy_halfline_check,
    hardy_pivot_check,
    hardy_weighted_check,
    hardy_reflected_check,
    perturbation_check,
    norm_equivalence_check,
    substitution_form_check,
)
from .form_checks import spectral_gap_check, form_bounds_check
from .suite import run_suite

__all__ = [
    "InequalityCheck",
    "poincare_check",
    "poincare_extremal",
    "poincare_centered_check",
    "hardy_halfline_check",
    "hardy_pivot_check",
    "hardy_weighted_check",
    "hardy_reflected_check",
    "perturbation_check",
    "norm_equivalence_check",
    "substitution_form_check",
    "spectral_gap_check",
    "form_bounds_check",
    "run_suite",
]
