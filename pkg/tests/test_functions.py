import numpy as np
import pytest

from conftest import UNIT
from fredholm_bvp import ConstantFunction, ExpressionFunction, Grid, PolynomialFunction, TabulatedFunction
from fredholm_bvp.expressions import parse_expression
from fredholm_bvp.functions import as_array_function


def test_constant_function_orders():
    fn = ConstantFunction(np.array([[1.0, 2.0], [3.0, 4.0]]))
    ts = np.linspace(0, 1, 5)
    np.testing.assert_array_equal(fn.eval(ts)[2], [[1, 2], [3, 4]])
    assert np.all(fn.eval(ts, order=1) == 0)


def test_polynomial_function_derivatives():
    # C0 + C1 t + C2 t^2 with distinct matrices per power
    c0 = np.array([[1.0, 0.0], [0.0, 1.0]])
    c1 = np.array([[0.0, 2.0], [0.0, 0.0]])
    c2 = np.array([[0.0, 0.0], [3.0, 0.0]])
    fn = PolynomialFunction(np.stack([c0, c1, c2]))
    ts = np.array([0.0, 0.5, 2.0])
    for i, t in enumerate(ts):
        np.testing.assert_allclose(fn.eval(ts)[i], c0 + c1 * t + c2 * t * t, atol=1e-14)
        np.testing.assert_allclose(fn.eval(ts, order=1)[i], c1 + 2 * c2 * t, atol=1e-14)
        np.testing.assert_allclose(fn.eval(ts, order=2)[i], 2 * c2, atol=1e-14)
        np.testing.assert_allclose(fn.eval(ts, order=3)[i], 0 * c2, atol=1e-14)


def test_expression_function_with_eps():
    entries = np.array([[parse_expression("eps * t"), parse_expression("sin(t)")]],
                       dtype=object)
    fn = ExpressionFunction(entries, eps=0.5)
    ts = np.linspace(0, 1, 4)
    np.testing.assert_allclose(fn.eval(ts)[:, 0, 0], 0.5 * ts, atol=1e-15)
    np.testing.assert_allclose(fn.eval(ts, order=1)[:, 0, 0], 0.5 * np.ones_like(ts), atol=1e-15)
    np.testing.assert_allclose(fn.eval(ts, order=1)[:, 0, 1], np.cos(ts), atol=1e-15)


def test_tabulated_function_differentiates_top_order():
    grid = Grid.uniform(UNIT, 1001)
    samples = np.sin(grid.nodes)[None, :, None, None]
    fn = TabulatedFunction(grid, samples)
    ts = np.linspace(0.1, 0.9, 7)
    np.testing.assert_allclose(fn.eval(ts, order=1)[:, 0, 0], np.cos(ts), atol=1e-9)
    np.testing.assert_allclose(fn.eval(ts)[:, 0, 0], np.sin(ts), atol=1e-10)


def test_tabulated_function_uses_supplied_orders():
    grid = Grid.uniform(UNIT, 51)
    samples = np.stack([
        np.sin(grid.nodes)[:, None, None],
        np.cos(grid.nodes)[:, None, None],
    ])
    fn = TabulatedFunction(grid, samples)
    np.testing.assert_allclose(fn.eval(np.array([0.5]), order=1)[0, 0, 0],
                               np.cos(0.5), atol=1e-12)


def test_as_array_function_shape_check():
    fn = as_array_function(np.eye(2), (2, 2))
    assert fn.shape == (2, 2)
    with pytest.raises(ValueError):
        as_array_function(np.eye(3), (2, 2))
