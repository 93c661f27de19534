"""Solvability analysis of linear ODE boundary-value problems.

The library assembles the characteristic matrix of a problem of any
order with generic inhomogeneous boundary conditions, reports its
Fredholm index and kernel/cokernel dimensions, solves well-posed
problems by superposition, and runs parameter-continuity experiments
over eps-indexed families of problems.
"""

from .boundary import BoundaryOperator, IntegralTerm, PointTerm, point_evaluation
from .characteristic import (
    CharacteristicMatrix,
    ProblemSpec,
    SolvabilityReport,
    build_characteristic_matrix,
    characteristic_from_blocks,
    cokernel_directions,
    kernel_directions,
    solvability_report,
)
from .closed_forms import (
    MatrixFunctionResult,
    cos_sqrt,
    matrix_exp,
    oracle_characteristic,
    phi,
    sinc_sqrt,
)
from .expressions import ExpressionError, parse_expression, symbolic_derivative
from .functions import (
    ArrayFunction,
    ConstantFunction,
    ExpressionFunction,
    PolynomialFunction,
    TabulatedFunction,
)
from .grid import (
    DerivativeStack,
    Grid,
    Interval,
    LebesgueExponent,
    MatrixTrajectory,
    lp_norm,
    resample,
    sobolev_norm,
)
from .limits import (
    LimitReport,
    MultipointFamily,
    MultipointSeries,
    ProblemFamily,
    check_condition_0,
    check_condition_I,
    check_condition_II,
    check_multipoint_assumptions,
    characteristic_convergence,
    convergence_experiment,
    multipoint_problem_family,
    semicontinuity_check,
)
from .ode import (
    CoefficientSet,
    FundamentalSet,
    RightHandSide,
    combine_homogeneous,
    fundamental_set,
    particular_solution,
    residual_stack,
)
from .solver import IllConditionedWarning, NotWellPosedError, discrepancy, solve, solve_detailed

__version__ = "0.1.0"

__all__ = [
    "ArrayFunction",
    "BoundaryOperator",
    "CharacteristicMatrix",
    "CoefficientSet",
    "ConstantFunction",
    "DerivativeStack",
    "ExpressionError",
    "ExpressionFunction",
    "FundamentalSet",
    "Grid",
    "IllConditionedWarning",
    "IntegralTerm",
    "Interval",
    "LebesgueExponent",
    "LimitReport",
    "MatrixFunctionResult",
    "MatrixTrajectory",
    "MultipointFamily",
    "MultipointSeries",
    "NotWellPosedError",
    "PointTerm",
    "PolynomialFunction",
    "ProblemFamily",
    "ProblemSpec",
    "RightHandSide",
    "SolvabilityReport",
    "TabulatedFunction",
    "build_characteristic_matrix",
    "characteristic_convergence",
    "characteristic_from_blocks",
    "check_condition_0",
    "check_condition_I",
    "check_condition_II",
    "check_multipoint_assumptions",
    "cokernel_directions",
    "combine_homogeneous",
    "convergence_experiment",
    "cos_sqrt",
    "discrepancy",
    "fundamental_set",
    "kernel_directions",
    "lp_norm",
    "matrix_exp",
    "multipoint_problem_family",
    "oracle_characteristic",
    "parse_expression",
    "particular_solution",
    "phi",
    "point_evaluation",
    "resample",
    "residual_stack",
    "semicontinuity_check",
    "sinc_sqrt",
    "sobolev_norm",
    "solvability_report",
    "solve",
    "solve_detailed",
    "symbolic_derivative",
]
