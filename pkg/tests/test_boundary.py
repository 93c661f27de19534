import numpy as np
import pytest

from conftest import UNIT, random_complex, random_stack, scalar_stack
from fredholm_bvp import (
    BoundaryOperator,
    CoefficientSet,
    DerivativeStack,
    Grid,
    IntegralTerm,
    Interval,
    LebesgueExponent,
    PointTerm,
    ProblemSpec,
    fundamental_set,
    point_evaluation,
    sobolev_norm,
)
from fredholm_bvp.grid import P1, P2, PINF, vector_magnitude


def constant_stack(grid, vector, max_order=1):
    samples = np.zeros((max_order + 1, grid.count, len(vector)), dtype=complex)
    samples[0] = np.asarray(vector)
    return DerivativeStack(grid, samples)


def test_identity_evaluation():
    grid = Grid.uniform(UNIT, 101)
    v = np.array([1.0 + 2.0j, -0.5])
    stack = constant_stack(grid, v)
    op = point_evaluation(0.0, np.eye(2))
    np.testing.assert_array_equal(op.apply(stack), v)


def test_integral_term_fundamental_theorem():
    # kernel I acting on y' with y(t) = t recovers y(1) - y(0) = 1
    grid = Grid.uniform(UNIT, 101)
    stack = scalar_stack(grid, [lambda ts: ts, lambda ts: np.ones_like(ts)])
    op = BoundaryOperator(1, (), IntegralTerm(np.eye(1)))
    assert op.apply(stack)[0] == pytest.approx(1.0, abs=1e-12)


def test_two_point_exponential():
    # oracle: direct evaluation, e^0 + e^1
    grid = Grid.uniform(UNIT, 1001)
    stack = scalar_stack(grid, [np.exp, np.exp])
    op = BoundaryOperator(1, (
        PointTerm(0.0, 0, np.eye(1)),
        PointTerm(1.0, 0, np.eye(1)),
    ))
    assert op.apply(stack)[0] == pytest.approx(1.0 + np.e, abs=1e-8)


def test_off_node_point_uses_interpolation():
    grid = Grid.uniform(UNIT, 101)
    stack = scalar_stack(grid, [np.sin, np.cos])
    op = point_evaluation(0.505, np.eye(1))
    assert op.apply(stack)[0] == pytest.approx(np.sin(0.505), abs=1e-9)


def test_apply_to_matrix_on_identity_trajectory():
    grid = Grid.uniform(UNIT, 101)
    coeffs = CoefficientSet(1, 2, 1, (np.zeros((2, 2)),))
    member = fundamental_set(coeffs, grid).members[0]
    op = point_evaluation(0.0, np.eye(2))
    np.testing.assert_array_equal(op.apply_to_matrix(member), np.eye(2))


def test_multipoint_higher_orders_drop_out_on_identity():
    # constant trajectory: only order-0 matrices survive, any points
    grid = Grid.uniform(UNIT, 101)
    rng = np.random.default_rng(9)
    coeffs = CoefficientSet(1, 2, 2, (np.zeros((2, 2)),))
    member = fundamental_set(coeffs, grid).members[0]
    order0 = [random_complex(rng, 2, 2) for _ in range(3)]
    junk = [random_complex(rng, 2, 2) for _ in range(3)]
    terms = [PointTerm(p, 0, mat) for p, mat in zip((0.0, 0.4, 1.0), order0)]
    terms += [PointTerm(p, d, mat) for p, d, mat in zip((0.2, 0.7, 0.9), (1, 2, 1), junk)]
    op = BoundaryOperator(2, tuple(terms))
    np.testing.assert_allclose(op.apply_to_matrix(member), sum(order0), atol=1e-12)


def test_first_derivative_at_left_endpoint():
    # oracle: d/dt exp(-A(t-a)) at a equals -A
    grid = Grid.uniform(UNIT, 501)
    rng = np.random.default_rng(10)
    a = random_complex(rng, 2, 2) * 0.4
    coeffs = CoefficientSet(1, 2, 1, (a,))
    member = fundamental_set(coeffs, grid).members[0]
    op = point_evaluation(0.0, np.eye(2), order=1)
    np.testing.assert_allclose(op.apply_to_matrix(member), -a, atol=1e-7)


def test_top_order_point_term_rejected():
    grid = Grid.uniform(UNIT, 101)
    stack = scalar_stack(grid, [np.sin, np.cos])
    op = point_evaluation(0.5, np.eye(1), order=1)
    with pytest.raises(ValueError, match="not continuous"):
        op.apply(stack)


def test_fractional_order_rejected_with_caputo_message():
    with pytest.raises(ValueError, match="Caputo"):
        PointTerm(0.5, 0.5, np.eye(2))


def test_dimension_mismatch_rejected():
    grid = Grid.uniform(UNIT, 101)
    stack = constant_stack(grid, np.array([1.0, 2.0, 3.0]))
    op = point_evaluation(0.0, np.eye(2))
    with pytest.raises(ValueError):
        op.apply(stack)


def _problem(op, r=1, m=2, n=1):
    coeffs = CoefficientSet(r, m, n, tuple(np.zeros((m, m)) for _ in range(r)))
    return ProblemSpec(UNIT, coeffs, op, LebesgueExponent(2.0))


def test_validate_well_formed():
    op = BoundaryOperator(2, (PointTerm(0.0, 0, np.eye(2)),))
    assert op.validate(_problem(op)) == []


def test_validate_underdetermined():
    op = BoundaryOperator(1, (PointTerm(0.0, 0, np.ones((1, 2))),))
    diagnostics = op.validate(_problem(op))
    assert any("underdetermined" in d for d in diagnostics)


def test_validate_overdetermined():
    op = BoundaryOperator(3, (PointTerm(0.0, 0, np.ones((3, 2))),))
    diagnostics = op.validate(_problem(op))
    assert any("overdetermined" in d for d in diagnostics)


def test_validate_out_of_range_point_and_order():
    op = BoundaryOperator(2, (PointTerm(1.5, 0, np.eye(2)),
                              PointTerm(0.5, 5, np.eye(2))))
    diagnostics = op.validate(_problem(op))
    assert any("outside" in d for d in diagnostics)
    assert any("out of range" in d for d in diagnostics)


def test_linearity():
    grid = Grid.uniform(UNIT, 201)
    rng = np.random.default_rng(11)
    op = BoundaryOperator(2, (
        PointTerm(0.0, 0, random_complex(rng, 2, 2)),
        PointTerm(0.63, 1, random_complex(rng, 2, 2)),
        PointTerm(1.0, 0, random_complex(rng, 2, 2)),
    ), IntegralTerm(random_complex(rng, 2, 2)))
    for _ in range(5):
        x = random_stack(grid, rng, 2, 2)
        y = random_stack(grid, rng, 2, 2)
        alpha = complex(rng.normal(), rng.normal())
        beta = complex(rng.normal(), rng.normal())
        combined = op.apply(alpha * x + beta * y)
        separate = alpha * op.apply(x) + beta * op.apply(y)
        scale = max(vector_magnitude(combined), 1.0)
        assert vector_magnitude(combined - separate) / scale <= 1e-12


def test_apply_to_matrix_agrees_with_columns_exactly():
    grid = Grid.uniform(UNIT, 201)
    rng = np.random.default_rng(12)
    a = random_complex(rng, 2, 2) * 0.3
    coeffs = CoefficientSet(1, 2, 1, (a,))
    member = fundamental_set(coeffs, grid).members[0]
    op = BoundaryOperator(2, (
        PointTerm(0.0, 0, random_complex(rng, 2, 2)),
        PointTerm(0.77, 1, random_complex(rng, 2, 2)),
    ), IntegralTerm(random_complex(rng, 2, 2)))
    result = op.apply_to_matrix(member)
    for j in range(2):
        np.testing.assert_array_equal(result[:, j], op.apply(member.column(j)))


def test_continuity_bound_empirical():
    grid = Grid.uniform(UNIT, 201)
    rng = np.random.default_rng(13)
    op = BoundaryOperator(2, (
        PointTerm(0.0, 0, random_complex(rng, 2, 2)),
        PointTerm(0.41, 1, random_complex(rng, 2, 2)),
        PointTerm(1.0, 0, random_complex(rng, 2, 2)),
    ), IntegralTerm(random_complex(rng, 2, 2)))
    for p in (P1, P2, PINF):
        constant = op.continuity_constant(UNIT, p, grid)
        for _ in range(10):
            stack = random_stack(grid, rng, 2, 2)
            assert vector_magnitude(op.apply(stack)) <= constant * sobolev_norm(stack, p)


def test_continuity_bound_longer_interval():
    interval = Interval(0.0, 2.0)
    grid = Grid.uniform(interval, 201)
    rng = np.random.default_rng(14)
    op = BoundaryOperator(1, (PointTerm(1.7, 0, random_complex(rng, 1, 1)),))
    constant = op.continuity_constant(interval, P2, grid)
    for _ in range(5):
        stack = random_stack(grid, rng, 1, 1)
        assert vector_magnitude(op.apply(stack)) <= constant * sobolev_norm(stack, P2)
