"""Uniform grids, derivative stacks and Lebesgue/Sobolev norms.

Functions on ``[a, b]`` are represented by their samples at uniform
nodes, together with samples of every derivative up to a fixed order.
Producers (the ODE integrator) generate each derivative order exactly
from the differential equation, so nothing here re-differentiates
sampled data except where explicitly asked to.

The finite-dimensional magnitude used inside every norm is the
entrywise absolute-value sum, for vectors and matrices alike; one
convention serves the norms, the boundary residuals and the
parameter-family assumption checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

DEFAULT_NODE_COUNT = 1001


@dataclass(frozen=True)
class Interval:
    """A finite interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b


@dataclass(frozen=True)
class Grid:
    """Uniform grid on an interval, endpoints included, at least 2 nodes."""

    interval: Interval
    nodes: np.ndarray = field(repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("grid needs at least two nodes")
        if not (nodes[0] == self.interval.a and nodes[-1] == self.interval.b):
            raise ValueError("grid must span the interval endpoints exactly")
        steps = np.diff(nodes)
        if np.any(steps <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
            raise ValueError("grid must be uniform")
        nodes.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, interval: Interval, count: int = DEFAULT_NODE_COUNT) -> "Grid":
        if count < 2:
            raise ValueError("node count must be at least 2")
        return cls(interval, np.linspace(interval.a, interval.b, count))

    @property
    def count(self) -> int:
        return self.nodes.size

    @property
    def step(self) -> float:
        return (self.interval.b - self.interval.a) / (self.count - 1)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def node_index(self, t: float, tol: float | None = None) -> int | None:
        """Index of the node closest to ``t`` if within ``tol``, else None."""
        if tol is None:
            tol = 1e-12 * max(1.0, abs(self.interval.a), abs(self.interval.b))
        idx = int(round((t - self.interval.a) / self.step))
        idx = min(max(idx, 0), self.count - 1)
        if abs(self.nodes[idx] - t) <= tol:
            return idx
        return None


_INF = math.inf


@dataclass(frozen=True)
class LebesgueExponent:
    """Integrability exponent p in [1, inf]; inf encodes the sup norm."""

    value: float

    def __post_init__(self):
        if not (self.value >= 1.0):
            raise ValueError(f"exponent must satisfy p >= 1, got {self.value}")

    @classmethod
    def parse(cls, raw) -> "LebesgueExponent":
        if isinstance(raw, LebesgueExponent):
            return raw
        if isinstance(raw, str):
            if raw.strip().lower() in ("inf", "infinity", "oo"):
                return cls(_INF)
            return cls(float(raw))
        return cls(float(raw))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def conjugate(self) -> float:
        """The conjugate exponent p' with 1/p + 1/p' = 1."""
        if self.is_infinite:
            return 1.0
        if self.value == 1.0:
            return _INF
        return self.value / (self.value - 1.0)


P1 = LebesgueExponent(1.0)
P2 = LebesgueExponent(2.0)
PINF = LebesgueExponent(_INF)


def entrywise_magnitude(values: np.ndarray) -> np.ndarray:
    """Per-node sum of absolute values over all non-node axes."""
    values = np.asarray(values)
    if values.ndim == 1:
        return np.abs(values)
    axes = tuple(range(1, values.ndim))
    return np.abs(values).sum(axis=axes)


def vector_magnitude(v: np.ndarray) -> float:
    """Entrywise absolute-value sum of a single vector or matrix."""
    return float(np.abs(v).sum())


def lp_norm(values: np.ndarray, p: LebesgueExponent, grid: Grid) -> float:
    """Lebesgue norm of grid samples.

    ``values`` has the node axis first; any trailing axes (vector or
    matrix components) are collapsed with the entrywise sum.  For finite
    p the integral is the composite trapezoid rule; for p = inf the norm
    is the maximum over nodes.
    """
    values = np.asarray(values)
    if values.shape[0] != grid.count:
        raise ValueError(
            f"sample count {values.shape[0]} does not match grid ({grid.count} nodes)"
        )
    magnitude = entrywise_magnitude(values)
    if p.is_infinite:
        return float(magnitude.max())
    integral = np.trapezoid(magnitude**p.value, dx=grid.step)
    return float(integral ** (1.0 / p.value))


class DerivativeStack:
    """Vector-valued function with derivative samples of orders 0..max_order.

    ``samples[k, i]`` is the order-k derivative at node i, a complex
    vector of length ``dimension``.  Instances are immutable.
    """

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 3:
            raise ValueError("stack samples must have shape (orders, nodes, dimension)")
        if samples.shape[1] != grid.count:
            raise ValueError("stack node count does not match the grid")
        samples = samples.copy()
        samples.flags.writeable = False
        self.grid = grid
        self.samples = samples

    @property
    def dimension(self) -> int:
        return self.samples.shape[2]

    @property
    def max_order(self) -> int:
        return self.samples.shape[0] - 1

    @classmethod
    def from_callables(cls, grid: Grid, derivatives, dimension: int | None = None):
        """Build a stack from per-order callables mapping t-array -> samples."""
        rows = []
        for fn in derivatives:
            values = np.asarray(fn(grid.nodes), dtype=complex)
            if values.ndim == 1:
                values = values[:, None]
            rows.append(values)
        samples = np.stack(rows)
        if dimension is not None and samples.shape[2] != dimension:
            raise ValueError("callable output dimension mismatch")
        return cls(grid, samples)

    def order(self, k: int) -> np.ndarray:
        return self.samples[k]

    def value_at(self, order: int, t: float) -> np.ndarray:
        """Order-``order`` derivative at ``t``; cubic interpolation off-node."""
        return interpolate_at(self.grid, self.samples[order], t)

    def __add__(self, other: "DerivativeStack") -> "DerivativeStack":
        if self.grid is not other.grid and not np.array_equal(self.grid.nodes, other.grid.nodes):
            raise ValueError("stacks live on different grids")
        return DerivativeStack(self.grid, self.samples + other.samples)

    def __sub__(self, other: "DerivativeStack") -> "DerivativeStack":
        if self.grid is not other.grid and not np.array_equal(self.grid.nodes, other.grid.nodes):
            raise ValueError("stacks live on different grids")
        return DerivativeStack(self.grid, self.samples - other.samples)

    def __mul__(self, scalar) -> "DerivativeStack":
        return DerivativeStack(self.grid, self.samples * scalar)

    __rmul__ = __mul__


class MatrixTrajectory:
    """Matrix-valued analog of DerivativeStack; samples (orders, nodes, m, m)."""

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim != 4:
            raise ValueError("trajectory samples must have shape (orders, nodes, m, m)")
        if samples.shape[1] != grid.count:
            raise ValueError("trajectory node count does not match the grid")
        samples = samples.copy()
        samples.flags.writeable = False
        self.grid = grid
        self.samples = samples

    @property
    def dimension(self) -> int:
        return self.samples.shape[2]

    @property
    def max_order(self) -> int:
        return self.samples.shape[0] - 1

    def order(self, k: int) -> np.ndarray:
        return self.samples[k]

    def value_at(self, order: int, t: float) -> np.ndarray:
        return interpolate_at(self.grid, self.samples[order], t)

    def column(self, j: int) -> DerivativeStack:
        return DerivativeStack(self.grid, self.samples[:, :, :, j])


def sobolev_norm(stack: DerivativeStack | MatrixTrajectory, p: LebesgueExponent) -> float:
    """Sum over derivative orders of the order-wise Lebesgue norms."""
    return sum(lp_norm(stack.samples[k], p, stack.grid) for k in range(stack.max_order + 1))


def sobolev_norm_samples(samples: np.ndarray, p: LebesgueExponent, grid: Grid) -> float:
    """sobolev_norm for a raw (orders, nodes, ...) sample array."""
    return sum(lp_norm(samples[k], p, grid) for k in range(samples.shape[0]))


# ---------------------------------------------------------------------------
# interpolation and finite differences on uniform grids


def interpolate_at(grid: Grid, values: np.ndarray, t: float) -> np.ndarray:
    """Evaluate node samples at an arbitrary point of the interval.

    Exact at nodes; elsewhere a local 4-point (cubic Lagrange) rule,
    which preserves the O(step^4) accuracy of stored samples.
    """
    if not grid.interval.contains(t):
        raise ValueError(f"point {t} outside the interval [{grid.interval.a}, {grid.interval.b}]")
    idx = grid.node_index(t)
    if idx is not None:
        return values[idx]
    h = grid.step
    base = int(np.floor((t - grid.interval.a) / h))
    lo = min(max(base - 1, 0), grid.count - 4)
    ts = grid.nodes[lo : lo + 4]
    result = np.zeros_like(values[0])
    for i in range(4):
        weight = 1.0
        for j in range(4):
            if j != i:
                weight *= (t - ts[j]) / (ts[i] - ts[j])
        result = result + weight * values[lo + i]
    return result


# 4th-order first-derivative stencils on a uniform grid; rows are the
# one-sided rules used at the first/last two nodes.
_EDGE_STENCIL = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
) / 12.0


def differentiate_samples(values: np.ndarray, step: float) -> np.ndarray:
    """4th-order finite-difference derivative along the node axis.

    Centered in the interior, one-sided at the two nodes next to each
    endpoint.  Needs at least five nodes.
    """
    values = np.asarray(values)
    n = values.shape[0]
    if n < 5:
        raise ValueError("4th-order differences need at least five nodes")
    out = np.empty_like(values, dtype=complex)
    out[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * step)
    for row, idx in ((0, 0), (1, 1)):
        out[idx] = np.tensordot(_EDGE_STENCIL[row], values[:5], axes=(0, 0)) / step
        out[n - 1 - idx] = -np.tensordot(_EDGE_STENCIL[row], values[-5:][::-1], axes=(0, 0)) / step
    return out


def resample(stack: DerivativeStack, new_grid: Grid) -> DerivativeStack:
    """Transfer a stack to another grid over the same interval.

    Cubic-spline interpolation per derivative order; endpoint samples
    are reproduced exactly.
    """
    if stack.grid.interval != new_grid.interval:
        raise ValueError("target grid spans a different interval")
    if np.array_equal(stack.grid.nodes, new_grid.nodes):
        return DerivativeStack(new_grid, stack.samples)
    orders = stack.max_order + 1
    out = np.empty((orders, new_grid.count, stack.dimension), dtype=complex)
    for k in range(orders):
        spline = CubicSpline(stack.grid.nodes, stack.samples[k], axis=0)
        out[k] = spline(new_grid.nodes)
        out[k, 0] = stack.samples[k, 0]
        out[k, -1] = stack.samples[k, -1]
    return DerivativeStack(new_grid, out)
