"""Superposition solver for well-posed problems, and discrepancies.

A well-posed problem is solved as y = y_p + sum_i Y_i xi_i where y_p is
any particular solution and the weight vector solves the square linear
system given by the characteristic matrix.  Non-well-posed problems are
refused with the full solvability report attached: the framework routes
such problems to kernel/cokernel analysis, not to least-squares
surrogates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .characteristic import (
    CharacteristicMatrix,
    ProblemSpec,
    SolvabilityReport,
    characteristic_from_fundamental,
    solvability_report,
)
from .grid import DerivativeStack, Grid, sobolev_norm, vector_magnitude
from .ode import combine_homogeneous, fundamental_set, particular_solution, residual_stack

CONDITION_WARN_THRESHOLD = 1e12


class IllConditionedWarning(UserWarning):
    """The characteristic matrix is numerically close to singular."""


class NotWellPosedError(RuntimeError):
    """Raised when solve() is asked to solve a non-well-posed problem."""

    def __init__(self, report: SolvabilityReport, matrix: CharacteristicMatrix):
        self.report = report
        self.matrix = matrix
        super().__init__(
            "problem is not well posed "
            f"(index={report.index}, dim ker={report.dim_kernel}, "
            f"dim coker={report.dim_cokernel}); solve refuses, see the attached report"
        )


@dataclass(frozen=True)
class SolveResult:
    """Solution stack plus the analysis artifacts produced along the way."""

    solution: DerivativeStack
    matrix: CharacteristicMatrix
    report: SolvabilityReport
    weights: np.ndarray
    max_residual: float


def solve_detailed(problem: ProblemSpec, grid: Grid, rank_tolerance: float | None = None,
                   initial_state: np.ndarray | None = None) -> SolveResult:
    """solve() returning the characteristic matrix and report as well."""
    if problem.rhs is None:
        raise ValueError("problem has no right-hand side to solve against")
    fset = fundamental_set(problem.coefficients, grid)
    matrix = characteristic_from_fundamental(problem, fset, rank_tolerance)
    report = solvability_report(matrix, problem)
    if not report.well_posed:
        raise NotWellPosedError(report, matrix)
    if matrix.condition_number > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"characteristic matrix condition number {matrix.condition_number:.3e} "
            f"exceeds {CONDITION_WARN_THRESHOLD:.0e}; boundary data may be amplified",
            IllConditionedWarning,
            stacklevel=2,
        )
    y_p = particular_solution(problem.coefficients, problem.rhs.f, grid, initial_state)
    defect = problem.rhs.c - problem.boundary.apply(y_p)
    weights = np.linalg.solve(matrix.entries, defect)
    solution = y_p + combine_homogeneous(fset, weights)
    return SolveResult(
        solution=solution,
        matrix=matrix,
        report=report,
        weights=weights,
        max_residual=fset.max_residual,
    )


def solve(problem: ProblemSpec, grid: Grid, rank_tolerance: float | None = None,
          initial_state: np.ndarray | None = None) -> DerivativeStack:
    """Solve (L, B) y = (f, c); refuses when the problem is not well posed."""
    return solve_detailed(problem, grid, rank_tolerance, initial_state).solution


def discrepancy(problem: ProblemSpec, candidate: DerivativeStack) -> float:
    """Residual of a candidate stack in a (possibly perturbed) problem.

    The equation part is measured in the order-n Sobolev norm, the
    boundary part with the entrywise absolute-value sum on C^q.
    """
    if problem.rhs is None:
        raise ValueError("discrepancy needs the problem's right-hand side")
    if candidate.max_order != problem.coefficients.max_order:
        raise ValueError(
            f"candidate carries orders 0..{candidate.max_order}, "
            f"expected 0..{problem.coefficients.max_order}"
        )
    residual = residual_stack(problem.coefficients, candidate, problem.rhs.f)
    equation_part = sobolev_norm(residual, problem.exponent)
    boundary_part = vector_magnitude(problem.boundary.apply(candidate) - problem.rhs.c)
    return equation_part + boundary_part
