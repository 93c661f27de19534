"""Matrix Cauchy problems and particular solutions for linear systems.

The differential expression is

    (L y)(t) = y^(r)(t) + sum_{d=0}^{r-1} A_d(t) y^(d)(t),

with m x m coefficient matrices A_d.  The homogeneous matrix problems
with Kronecker-delta initial data produce the fundamental set
{Y_1, ..., Y_r}; superposition with a particular solution then solves
the inhomogeneous equation.

Integration is classical fixed-step RK4 on the companion first-order
system, with the step equal to the grid step so trajectory samples land
exactly on the nodes.  Derivative orders r..n+r are not differentiated
numerically: order r comes from the equation itself and higher orders
from the Leibniz-differentiated equation, which only needs coefficient
derivatives up to order n.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .functions import ArrayFunction, as_array_function
from .grid import (
    DerivativeStack,
    Grid,
    MatrixTrajectory,
    differentiate_samples,
    entrywise_magnitude,
)


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of L; ``by_order[d]`` multiplies the order-d derivative.

    r is the equation order, m the system size, n the number of
    coefficient derivatives available (the smoothness index).
    """

    r: int
    m: int
    n: int
    by_order: tuple[ArrayFunction, ...]

    def __post_init__(self):
        if self.r < 1 or self.m < 1 or self.n < 0:
            raise ValueError("need r >= 1, m >= 1, n >= 0")
        if len(self.by_order) != self.r:
            raise ValueError(f"expected {self.r} coefficient matrices, got {len(self.by_order)}")
        coerced = tuple(as_array_function(fn, (self.m, self.m)) for fn in self.by_order)
        object.__setattr__(self, "by_order", coerced)

    @property
    def max_order(self) -> int:
        """Top derivative order carried by solutions: n + r."""
        return self.n + self.r


@dataclass(frozen=True)
class RightHandSide:
    """Inhomogeneity: vector function f (length m) and boundary data c."""

    f: ArrayFunction
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex).reshape(-1)
        c.flags.writeable = False
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class FundamentalSet:
    """The trajectories Y_1..Y_r with derivative orders 0..n+r.

    ``max_residual`` is the reported integration tolerance: the largest
    node-wise defect between a 4th-order finite difference of the
    order-(r-1) samples and the stored order-r samples.
    """

    members: tuple[MatrixTrajectory, ...]
    grid: Grid
    max_residual: float


def _coefficient_tables(coeffs: CoefficientSet, ts: np.ndarray, orders: int) -> list[list[np.ndarray]]:
    """A_d^{(q)} evaluated at ``ts`` for d = 0..r-1, q = 0..orders."""
    return [
        [coeffs.by_order[d].eval(ts, order=q) for q in range(orders + 1)]
        for d in range(coeffs.r)
    ]


def _companion_rhs(a_values: list[np.ndarray], state: np.ndarray, m: int, forcing: np.ndarray | None):
    """Right-hand side of the companion system at one time point.

    ``state`` has shape (r*m, w); block j holds the order-j derivative.
    """
    r = len(a_values)
    top = -sum(a_values[d] @ state[d * m : (d + 1) * m] for d in range(r))
    if forcing is not None:
        top = top + forcing
    if r == 1:
        return top
    return np.concatenate([state[m:], top], axis=0)


def _integrate(coeffs: CoefficientSet, grid: Grid, initial: np.ndarray,
               forcing_nodes: np.ndarray | None = None,
               forcing_mid: np.ndarray | None = None) -> np.ndarray:
    """Fixed-step RK4 for the companion system; returns (nodes, r*m, w)."""
    m, r = coeffs.m, coeffs.r
    h = grid.step
    a_nodes = [coeffs.by_order[d].eval(grid.nodes) for d in range(r)]
    a_mid = [coeffs.by_order[d].eval(grid.midpoints) for d in range(r)]
    states = np.empty((grid.count, *initial.shape), dtype=complex)
    states[0] = initial
    state = initial.astype(complex)
    # blow-up is detected explicitly below, so intermediate overflow
    # warnings from numpy are redundant
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(grid.count - 1):
            an = [a[i] for a in a_nodes]
            am = [a[i] for a in a_mid]
            an1 = [a[i + 1] for a in a_nodes]
            fn = forcing_nodes[i] if forcing_nodes is not None else None
            fm = forcing_mid[i] if forcing_mid is not None else None
            fn1 = forcing_nodes[i + 1] if forcing_nodes is not None else None
            k1 = _companion_rhs(an, state, m, fn)
            k2 = _companion_rhs(am, state + 0.5 * h * k1, m, fm)
            k3 = _companion_rhs(am, state + 0.5 * h * k2, m, fm)
            k4 = _companion_rhs(an1, state + h * k3, m, fn1)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state.view(float))):
                raise FloatingPointError(
                    f"integration blew up between nodes {i} and {i + 1} "
                    f"(t = {grid.nodes[i]:.6g}); coefficients too stiff for the grid"
                )
            states[i + 1] = state
    return states


def _lower_order_part(a_tables, y_orders: np.ndarray, s: int) -> np.ndarray:
    """sum_d sum_{q<=s} binom(s,q) A_d^{(q)} y^{(d+s-q)} at all nodes.

    ``y_orders[k]`` holds the order-k samples, known at least up to
    r-1+s; works for vector (nodes, m) and matrix (nodes, m, m) samples.
    """
    total = None
    for d, derivs in enumerate(a_tables):
        for q in range(s + 1):
            term = comb(s, q) * _matvec(derivs[q], y_orders[d + s - q])
            total = term if total is None else total + term
    return total


def _matvec(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Node-wise product A(t) y(t) for vector or matrix samples y."""
    if y.ndim == 2:
        return np.einsum("nij,nj->ni", a, y)
    return a @ y


def _extend_orders(coeffs: CoefficientSet, a_tables, low_orders: np.ndarray,
                   f_tables: list[np.ndarray] | None = None) -> np.ndarray:
    """Append orders r..n+r to samples of orders 0..r-1 via the recurrence."""
    r, n = coeffs.r, coeffs.n
    orders = [low_orders[k] for k in range(r)]
    for s in range(n + 1):
        value = -_lower_order_part(a_tables, orders, s)
        if f_tables is not None:
            value = value + f_tables[s]
        orders.append(value)
    return np.stack(orders)


def fundamental_set(coeffs: CoefficientSet, grid: Grid) -> FundamentalSet:
    """Integrate the r homogeneous matrix problems on the grid.

    Member i starts from Y_i^{(j-1)}(a) = delta_{ij} I and carries
    derivative orders 0..n+r.
    """
    m, r = coeffs.m, coeffs.r
    size = r * m
    states = _integrate(coeffs, grid, np.eye(size, dtype=complex))
    a_tables = _coefficient_tables(coeffs, grid.nodes, coeffs.n)
    members = []
    max_residual = 0.0
    for i in range(r):
        low = np.stack(
            [states[:, j * m : (j + 1) * m, i * m : (i + 1) * m] for j in range(r)]
        )
        samples = _extend_orders(coeffs, a_tables, low)
        members.append(MatrixTrajectory(grid, samples))
        if grid.count >= 5:
            defect = differentiate_samples(samples[r - 1], grid.step) - samples[r]
            max_residual = max(max_residual, float(entrywise_magnitude(defect).max()))
    return FundamentalSet(tuple(members), grid, max_residual)


def particular_solution(coeffs: CoefficientSet, f, grid: Grid,
                        initial_state: np.ndarray | None = None) -> DerivativeStack:
    """One solution of L y = f with prescribed companion initial data.

    The default initial state is zero: y^{(j)}(a) = 0 for j < r.  Any
    other seed is equally valid; the boundary solver corrects the
    homogeneous content afterwards.
    """
    m, r = coeffs.m, coeffs.r
    f = as_array_function(f, (m,))
    if initial_state is None:
        initial = np.zeros((r * m, 1), dtype=complex)
    else:
        initial = np.asarray(initial_state, dtype=complex).reshape(r * m, 1)
    f_nodes = f.eval(grid.nodes)
    f_mid = f.eval(grid.midpoints)
    states = _integrate(
        coeffs, grid, initial,
        forcing_nodes=f_nodes[:, :, None], forcing_mid=f_mid[:, :, None],
    )
    low = np.stack([states[:, j * m : (j + 1) * m, 0] for j in range(r)])
    a_tables = _coefficient_tables(coeffs, grid.nodes, coeffs.n)
    f_tables = [f.eval(grid.nodes, order=s) for s in range(coeffs.n + 1)]
    samples = _extend_orders(coeffs, a_tables, low, f_tables)
    return DerivativeStack(grid, samples)


def combine_homogeneous(fset: FundamentalSet, weights: np.ndarray) -> DerivativeStack:
    """The homogeneous solution sum_i Y_i w_i for a weight vector in C^{rm}."""
    m = fset.members[0].dimension
    r = len(fset.members)
    weights = np.asarray(weights, dtype=complex).reshape(r, m)
    samples = sum(
        np.einsum("onij,j->oni", member.samples, weights[i])
        for i, member in enumerate(fset.members)
    )
    return DerivativeStack(fset.grid, samples)


def residual_stack(coeffs: CoefficientSet, y: DerivativeStack, f=None,
                   orders: int | None = None) -> DerivativeStack:
    """Samples of (L y - f) and its derivatives 0..orders (default n).

    ``y`` must carry derivative orders up to r + orders.
    """
    if orders is None:
        orders = coeffs.n
    if y.max_order < coeffs.r + orders:
        raise ValueError(
            f"stack carries orders 0..{y.max_order}, need {coeffs.r + orders}"
        )
    grid = y.grid
    a_tables = _coefficient_tables(coeffs, grid.nodes, orders)
    f_fn = as_array_function(f, (coeffs.m,)) if f is not None else None
    rows = []
    y_orders = [y.samples[k] for k in range(y.max_order + 1)]
    for s in range(orders + 1):
        value = y_orders[coeffs.r + s] + _lower_order_part(a_tables, y_orders, s)
        if f_fn is not None:
            value = value - f_fn.eval(grid.nodes, order=s)
        rows.append(value)
    return DerivativeStack(grid, np.stack(rows))
