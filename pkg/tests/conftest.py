"""Shared builders for analytic derivative stacks and random problems."""

import numpy as np

from fredholm_bvp import DerivativeStack, Interval

UNIT = Interval(0.0, 1.0)


def scalar_stack(grid, rows):
    """Stack from per-order callables t -> scalar (dimension 1)."""
    return DerivativeStack.from_callables(grid, rows)


# Smooth basis with exact derivative towers, used to draw random stacks.
def _poly_tower(degree):
    def row(k):
        if k > degree:
            return lambda ts: np.zeros_like(ts)
        factor = 1.0
        for i in range(k):
            factor *= degree - i
        return lambda ts, f=factor, p=degree - k: f * ts**p

    return row


def _trig_tower(start):
    table = [np.sin, np.cos, lambda ts: -np.sin(ts), lambda ts: -np.cos(ts)]
    return lambda k: table[(start + k) % 4]


def _exp_tower(rate):
    return lambda k: (lambda ts, c=rate**k: c * np.exp(rate * ts))


_TOWERS = [_poly_tower(0), _poly_tower(1), _poly_tower(2), _poly_tower(3),
           _trig_tower(0), _trig_tower(1), _exp_tower(0.5), _exp_tower(-1.0)]


def random_stack(grid, rng, dimension, max_order):
    """Random smooth stack: complex combinations of the basis towers."""
    weights = rng.normal(size=(len(_TOWERS), dimension)) \
        + 1j * rng.normal(size=(len(_TOWERS), dimension))
    samples = np.zeros((max_order + 1, grid.count, dimension), dtype=complex)
    for b, tower in enumerate(_TOWERS):
        for k in range(max_order + 1):
            samples[k] += np.outer(tower(k)(grid.nodes), weights[b])
    return DerivativeStack(grid, samples)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
