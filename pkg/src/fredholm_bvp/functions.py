"""Time-dependent array-valued functions with derivative evaluation.

Equation coefficients, right-hand sides and integral kernels all need
the same capability: evaluate an (possibly matrix-valued) function of t
at arbitrary points, for derivative orders 0..n.  Four representations
cover the practical cases:

* constant arrays (derivatives vanish),
* matrix polynomials in t (derivatives exact),
* entrywise expression trees (derivatives symbolic, hence exact),
* tabulated samples on a grid (derivatives by 4th-order differences,
  values off the table by cubic interpolation).
"""

from __future__ import annotations

import numpy as np

from . import expressions as ex
from .grid import Grid, differentiate_samples, interpolate_at


class ArrayFunction:
    """Shared interface: ``eval(ts, order)`` -> array (len(ts), *shape)."""

    shape: tuple[int, ...]

    def eval(self, ts: np.ndarray, order: int = 0) -> np.ndarray:
        raise NotImplementedError

    def eval_at(self, t: float, order: int = 0) -> np.ndarray:
        return self.eval(np.asarray([t], dtype=float), order)[0]


class ConstantFunction(ArrayFunction):
    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        values.flags.writeable = False
        self.values = values
        self.shape = values.shape

    def eval(self, ts, order: int = 0) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.zeros((ts.size, *self.shape), dtype=complex)
        if order == 0:
            out[:] = self.values
        return out


class PolynomialFunction(ArrayFunction):
    """Array-valued polynomial sum_k C_k t^k; ``coeffs[k]`` is C_k."""

    def __init__(self, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim < 1:
            raise ValueError("polynomial coefficients need a leading degree axis")
        coeffs.flags.writeable = False
        self.coeffs = coeffs
        self.shape = coeffs.shape[1:]

    def eval(self, ts, order: int = 0) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        coeffs = self.coeffs
        for _ in range(order):
            if coeffs.shape[0] <= 1:
                coeffs = np.zeros((1, *self.shape), dtype=complex)
                break
            factors = np.arange(1, coeffs.shape[0]).reshape(-1, *([1] * len(self.shape)))
            coeffs = coeffs[1:] * factors
        out = np.zeros((ts.size, *self.shape), dtype=complex)
        for ck in coeffs[::-1]:
            out = out * ts.reshape(-1, *([1] * len(self.shape))) + ck
        return out


class ExpressionFunction(ArrayFunction):
    """Entrywise expression trees in t, with ``eps`` bound at build time."""

    def __init__(self, entries, eps: float | None = None):
        entries = np.asarray(entries, dtype=object)
        self.entries = entries
        self.shape = entries.shape
        self.eps = eps
        self._derivatives = {0: entries}

    def _entries_for(self, order: int):
        if order not in self._derivatives:
            previous = self._entries_for(order - 1)
            diffed = np.empty_like(previous)
            for idx in np.ndindex(previous.shape):
                diffed[idx] = ex.symbolic_derivative(previous[idx], "t")
            self._derivatives[order] = diffed
        return self._derivatives[order]

    def eval(self, ts, order: int = 0) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        entries = self._entries_for(order)
        out = np.empty((ts.size, *self.shape), dtype=complex)
        for idx in np.ndindex(self.shape):
            out[(slice(None), *idx)] = ex.evaluate(entries[idx], t=ts, eps=self.eps)
        return out


class TabulatedFunction(ArrayFunction):
    """Samples on a grid for orders 0..K; higher orders by differences.

    ``samples`` has shape (K+1, nodes, *shape).  Off-node evaluation is
    cubic, so derived quantities keep O(step^4) accuracy on smooth data.
    """

    def __init__(self, grid: Grid, samples: np.ndarray):
        samples = np.asarray(samples, dtype=complex)
        if samples.ndim < 2 or samples.shape[1] != grid.count:
            raise ValueError("tabulated samples must have shape (orders, nodes, ...)")
        self.grid = grid
        self._by_order = {k: samples[k] for k in range(samples.shape[0])}
        self.supplied_orders = samples.shape[0] - 1
        self.shape = samples.shape[2:]

    def _order_samples(self, order: int) -> np.ndarray:
        if order not in self._by_order:
            previous = self._order_samples(order - 1)
            self._by_order[order] = differentiate_samples(previous, self.grid.step)
        return self._by_order[order]

    def eval(self, ts, order: int = 0) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        values = self._order_samples(order)
        out = np.empty((ts.size, *self.shape), dtype=complex)
        for i, t in enumerate(ts):
            out[i] = interpolate_at(self.grid, values, float(t))
        return out


def as_array_function(obj, shape: tuple[int, ...] | None = None) -> ArrayFunction:
    """Coerce a constant array or pass through an ArrayFunction."""
    if isinstance(obj, ArrayFunction):
        fn = obj
    else:
        fn = ConstantFunction(np.asarray(obj, dtype=complex))
    if shape is not None and fn.shape != shape:
        raise ValueError(f"expected shape {shape}, got {fn.shape}")
    return fn


def zero_function(shape: tuple[int, ...]) -> ConstantFunction:
    return ConstantFunction(np.zeros(shape, dtype=complex))
