"""Boundary operators: point-derivative terms plus an integral term.

An operator maps a solution stack to a complex vector of length q (the
number of scalar boundary conditions).  It is a finite sum of terms
``matrix @ y^(d)(t_k)`` with d strictly below the stack's top order,
optionally plus ``integral of kernel(t) @ y^(top)(t) dt``.  The same
representation covers one-point canonical conditions, two-point and
multipoint conditions.

Point evaluation of the top derivative is rejected: the top derivative
is merely integrable, so its point values carry no meaning (and no
continuity bound).  Fractional derivative orders are rejected as well;
only integer orders are supported, so boundary conditions written with
Caputo-style fractional derivatives must be reformulated before use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import ArrayFunction, as_array_function
from .grid import (
    DerivativeStack,
    Grid,
    Interval,
    LebesgueExponent,
    MatrixTrajectory,
    vector_magnitude,
)

# Worst-case Lebesgue constant of the local 4-point cubic interpolation
# used for off-node point evaluation (attained near the grid ends).
_INTERP_CONSTANT = 2.0


@dataclass(frozen=True)
class PointTerm:
    """One term ``matrix @ y^(order)(point)``; matrix is q x m."""

    point: float
    order: int
    matrix: np.ndarray

    def __post_init__(self):
        order_value = float(self.order)
        if not order_value.is_integer():
            raise ValueError(
                f"fractional derivative order {self.order} is not supported: "
                "only integer orders are meaningful here (Caputo-style "
                "fractional boundary terms are out of scope)"
            )
        order = int(order_value)
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2:
            raise ValueError("point-term matrix must be two-dimensional")
        matrix = matrix.copy()
        matrix.flags.writeable = False
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "matrix", matrix)


@dataclass(frozen=True)
class IntegralTerm:
    """Weight acting on the top derivative: integral of kernel(t) y^(top)(t)."""

    kernel: ArrayFunction

    def __post_init__(self):
        object.__setattr__(self, "kernel", as_array_function(self.kernel))
        if len(self.kernel.shape) != 2:
            raise ValueError("integral kernel must be matrix-valued")


@dataclass(frozen=True)
class BoundaryOperator:
    """q scalar conditions assembled from point terms and an integral term."""

    codomain: int
    point_terms: tuple[PointTerm, ...] = ()
    integral_term: IntegralTerm | None = None

    def __post_init__(self):
        if self.codomain < 1:
            raise ValueError("codomain must be positive")
        object.__setattr__(self, "point_terms", tuple(self.point_terms))
        for term in self.point_terms:
            if term.matrix.shape[0] != self.codomain:
                raise ValueError(
                    f"point-term matrix has {term.matrix.shape[0]} rows, expected {self.codomain}"
                )
        if self.integral_term is not None and self.integral_term.kernel.shape[0] != self.codomain:
            raise ValueError("integral kernel row count does not match the codomain")

    @property
    def max_point_order(self) -> int:
        return max((term.order for term in self.point_terms), default=-1)

    def _check_stack(self, stack) -> None:
        for term in self.point_terms:
            if term.order >= stack.max_order:
                raise ValueError(
                    f"point term of order {term.order} is not continuous on stacks "
                    f"of top order {stack.max_order}; orders up to {stack.max_order - 1} only"
                )
            if term.matrix.shape[1] != stack.dimension:
                raise ValueError("point-term matrix column count does not match the stack")

    def apply(self, stack: DerivativeStack) -> np.ndarray:
        """Value of the operator on a derivative stack; a C^q vector."""
        self._check_stack(stack)
        result = np.zeros(self.codomain, dtype=complex)
        for term in self.point_terms:
            result += term.matrix @ stack.value_at(term.order, term.point)
        if self.integral_term is not None:
            kernel = self.integral_term.kernel.eval(stack.grid.nodes)
            integrand = np.einsum("nqm,nm->nq", kernel, stack.samples[stack.max_order])
            result += np.trapezoid(integrand, dx=stack.grid.step, axis=0)
        return result

    def apply_to_matrix(self, trajectory: MatrixTrajectory) -> np.ndarray:
        """Column-wise action on an m x m trajectory; a q x m matrix.

        Shares the code path of ``apply`` so the two agree exactly.
        """
        self._check_stack(trajectory)
        columns = [self.apply(trajectory.column(j)) for j in range(trajectory.dimension)]
        return np.stack(columns, axis=1)

    def validate(self, problem) -> list[str]:
        """Diagnostics against a problem: determinacy, ranges, dimensions."""
        diagnostics = []
        state_size = problem.r * problem.m
        if self.codomain < state_size:
            diagnostics.append(
                f"underdetermined: {self.codomain} scalar conditions for "
                f"{state_size} degrees of freedom"
            )
        elif self.codomain > state_size:
            diagnostics.append(
                f"overdetermined: {self.codomain} scalar conditions for "
                f"{state_size} degrees of freedom"
            )
        top = problem.coefficients.max_order
        for i, term in enumerate(self.point_terms):
            if term.order > top - 1:
                diagnostics.append(
                    f"point term {i}: order {term.order} out of range 0..{top - 1}"
                )
            if not problem.interval.contains(term.point):
                diagnostics.append(
                    f"point term {i}: point {term.point} outside "
                    f"[{problem.interval.a}, {problem.interval.b}]"
                )
            if term.matrix.shape[1] != problem.m:
                diagnostics.append(
                    f"point term {i}: matrix has {term.matrix.shape[1]} columns, expected {problem.m}"
                )
        if self.integral_term is not None and self.integral_term.kernel.shape[1] != problem.m:
            diagnostics.append("integral kernel column count does not match the system size")
        return diagnostics

    def continuity_constant(self, interval: Interval, p: LebesgueExponent,
                            grid: Grid | None = None) -> float:
        """An explicit C with |B y| <= C * sobolev_norm(y, p).

        Point values are controlled through the averaging bound
        |v(t)| <= (b-a)^(1/p') * max(1/(b-a), 1) * (||v||_p + ||v'||_p),
        times the interpolation constant; the integral term is bounded
        by the Hoelder pairing with the kernel's L_{p'} norm.
        """
        length = interval.length
        if p.is_infinite:
            embed = 1.0
        else:
            embed = length ** (1.0 / p.conjugate) if np.isfinite(p.conjugate) else 1.0
        embed *= max(1.0 / length, 1.0)
        constant = sum(
            _INTERP_CONSTANT * vector_magnitude(term.matrix) * embed
            for term in self.point_terms
        )
        if self.integral_term is not None:
            if grid is None:
                grid = Grid.uniform(interval)
            kernel = self.integral_term.kernel.eval(grid.nodes)
            weight = np.abs(kernel).sum(axis=(1, 2))
            q_conj = p.conjugate
            if np.isinf(q_conj):
                constant += float(weight.max())
            else:
                constant += float(np.trapezoid(weight**q_conj, dx=grid.step) ** (1.0 / q_conj))
        return constant


def point_evaluation(point: float, matrix: np.ndarray, order: int = 0) -> BoundaryOperator:
    """Convenience: the single-term operator y -> matrix @ y^(order)(point)."""
    matrix = np.asarray(matrix, dtype=complex)
    return BoundaryOperator(matrix.shape[0], (PointTerm(point, order, matrix),))
