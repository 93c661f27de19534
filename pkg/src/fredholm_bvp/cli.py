"""Command-line interface: analyze, solve, family, oracle-check.

Machine-readable reports are JSON with a fixed field order and floats
formatted at 17 significant digits, so identical inputs and flags
produce byte-identical output.  Exit status: 0 on success, 2 when an
analysis completes but the problem is not well posed, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .characteristic import (
    ProblemSpec,
    build_characteristic_matrix,
    kernel_directions,
    solvability_report,
)
from .boundary import BoundaryOperator, IntegralTerm, PointTerm
from .closed_forms import oracle_characteristic
from .document import DocumentError, document_family, document_multipoint, document_problem, load_document
from .expressions import ExpressionError
from .functions import ConstantFunction
from .grid import DEFAULT_NODE_COUNT, Grid, Interval, LebesgueExponent, vector_magnitude
from .limits import ProblemFamily, convergence_experiment
from .ode import CoefficientSet, residual_stack
from .solver import NotWellPosedError, solve_detailed

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_WELL_POSED = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems must exit 1; status 2 is reserved for not-well-posed
    def error(self, message):
        raise CliError(message)


# ---------------------------------------------------------------------------
# deterministic JSON emission


def _format_float(value: float) -> str:
    if value != value:
        return "null"
    if value == float("inf"):
        return '"inf"'
    if value == float("-inf"):
        return '"-inf"'
    return f"{value:.17g}"


def emit_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        import json as _json

        return _json.dumps(obj)
    if isinstance(obj, complex):
        return emit_json([obj.real, obj.imag], indent)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join("  " * (indent + 1) + emit_json(x, indent + 1) for x in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        import json as _json

        inner = ",\n".join(
            "  " * (indent + 1) + _json.dumps(str(k)) + ": " + emit_json(v, indent + 1)
            for k, v in obj.items()
        )
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _complex_matrix_doc(matrix: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(matrix)]


def _format_complex(z: complex) -> str:
    return f"{z.real:+.6g}{z.imag:+.6g}j"


def _matrix_lines(matrix: np.ndarray, title: str) -> list[str]:
    lines = [f"{title}:"]
    for row in np.atleast_2d(matrix):
        lines.append("  [" + ", ".join(_format_complex(z) for z in row) + "]")
    return lines


# ---------------------------------------------------------------------------
# command handlers


def _write_output(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _analysis_documents(problem: ProblemSpec, grid: Grid, rank_tol):
    matrix = build_characteristic_matrix(problem, grid, rank_tol)
    report = solvability_report(matrix, problem)
    directions = kernel_directions(matrix)
    doc = {
        "problem": {
            "interval": {"a": problem.interval.a, "b": problem.interval.b},
            "orders": {"r": problem.r, "m": problem.m, "n": problem.n},
            "conditions": problem.q,
        },
        "grid_nodes": grid.count,
        "characteristic_matrix": _complex_matrix_doc(matrix.entries),
        "singular_values": [float(s) for s in matrix.singular_values],
        "rank_tolerance": matrix.rank_tolerance,
        "numerical_rank": matrix.numerical_rank,
        "report": {
            "index": report.index,
            "dim_kernel": report.dim_kernel,
            "dim_cokernel": report.dim_cokernel,
            "well_posed": report.well_posed,
            "diagnostics": list(report.diagnostics),
        },
        "kernel_directions": [
            [[float(z.real), float(z.imag)] for z in direction] for direction in directions
        ],
    }
    return matrix, report, directions, doc


def _run_analyze(args) -> int:
    problem = document_problem(load_document(args.document))
    grid = Grid.uniform(problem.interval, args.nodes)
    matrix, report, directions, doc = _analysis_documents(problem, grid, args.rank_tol)
    doc = {"command": "analyze", **doc}
    if args.format == "machine":
        _write_output(emit_json(doc), args.out)
    else:
        lines = []
        lines.extend(_matrix_lines(matrix.entries, "characteristic matrix"))
        lines.append("singular values: "
                     + ", ".join(f"{s:.6e}" for s in matrix.singular_values))
        lines.append(f"numerical rank: {matrix.numerical_rank} "
                     f"(tolerance {matrix.rank_tolerance:.3e})")
        lines.append(f"index: {report.index}")
        lines.append(f"dim kernel: {report.dim_kernel}")
        lines.append(f"dim cokernel: {report.dim_cokernel}")
        lines.append(f"well posed: {'yes' if report.well_posed else 'no'}")
        for diagnostic in report.diagnostics:
            lines.append(f"diagnostic: {diagnostic}")
        for i, direction in enumerate(directions):
            lines.append(
                f"kernel direction {i}: ["
                + ", ".join(_format_complex(z) for z in direction) + "]"
            )
        _write_output("\n".join(lines), args.out)
    return EXIT_OK if report.well_posed else EXIT_NOT_WELL_POSED


def _run_solve(args) -> int:
    problem = document_problem(load_document(args.document))
    grid = Grid.uniform(problem.interval, args.nodes)
    result = solve_detailed(problem, grid, args.rank_tol)
    y = result.solution
    residual = residual_stack(problem.coefficients, y, problem.rhs.f, orders=0)
    equation_residual = float(np.abs(residual.samples[0]).sum(axis=1).max())
    boundary_residual = vector_magnitude(problem.boundary.apply(y) - problem.rhs.c)
    if args.format == "machine":
        doc = {
            "command": "solve",
            "grid_nodes": grid.count,
            "nodes": [float(t) for t in grid.nodes],
            "orders": y.max_order,
            "samples": [
                [[[float(z.real), float(z.imag)] for z in node] for node in order]
                for order in y.samples
            ],
            "weights": [[float(z.real), float(z.imag)] for z in result.weights],
            "residuals": {
                "equation_max": equation_residual,
                "boundary": boundary_residual,
                "integration": result.max_residual,
            },
            "condition_number": float(result.matrix.condition_number),
        }
        _write_output(emit_json(doc), args.out)
    else:
        lines = [
            f"solved on {grid.count} nodes; derivative orders 0..{y.max_order}",
            f"equation residual (max node): {equation_residual:.3e}",
            f"boundary residual: {boundary_residual:.3e}",
            f"characteristic matrix condition number: {result.matrix.condition_number:.3e}",
            "solution samples (order 0):",
        ]
        step = max(1, grid.count // 10)
        for i in range(0, grid.count, step):
            values = ", ".join(_format_complex(z) for z in y.samples[0, i])
            lines.append(f"  t={grid.nodes[i]:+.6f}  [{values}]")
        _write_output("\n".join(lines), args.out)
    return EXIT_OK


def _run_family(args) -> int:
    doc = load_document(args.document)
    family = document_family(doc)
    if args.eps_schedule:
        family = ProblemFamily(family.at_zero, family.generator,
                               epsilons=tuple(args.eps_schedule))
    multipoint = document_multipoint(doc)
    grid = Grid.uniform(family.at_zero.interval, args.nodes)
    report = convergence_experiment(family, grid, rank_tolerance=args.rank_tol,
                                    multipoint=multipoint)
    if args.format == "machine":
        _write_output(emit_json({"command": "family", **report.to_document()}), args.out)
    else:
        _write_output(report.to_text(), args.out)
    return EXIT_OK


def _run_oracle_check(args) -> int:
    if args.document in _BUILTINS:
        name, problem, oracle = _BUILTINS[args.document]()
    else:
        doc = load_document(args.document)
        problem = document_problem(doc)
        name, oracle = _oracle_from_problem(problem)
    grid = Grid.uniform(problem.interval, args.nodes)
    matrix = build_characteristic_matrix(problem, grid, args.rank_tol)
    deviation = float(np.abs(matrix.entries - oracle).max())
    scale = float(np.abs(oracle).max())
    relative = deviation / scale if scale > 0 else deviation
    if args.format == "machine":
        doc_out = {
            "command": "oracle-check",
            "example": name,
            "grid_nodes": grid.count,
            "numerical": _complex_matrix_doc(matrix.entries),
            "closed_form": _complex_matrix_doc(oracle),
            "max_deviation": deviation,
            "relative_deviation": relative,
        }
        _write_output(emit_json(doc_out), args.out)
    else:
        lines = [f"configuration: {name}"]
        lines.extend(_matrix_lines(matrix.entries, "numerical"))
        lines.extend(_matrix_lines(oracle, "closed form"))
        lines.append(f"max entrywise deviation: {deviation:.6e}")
        lines.append(f"relative deviation: {relative:.6e}")
        _write_output("\n".join(lines), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle-check configurations


def _collect_point_sums(problem: ProblemSpec) -> dict[int, dict[float, np.ndarray]]:
    """matrices summed per (order, point) for oracle parameter extraction."""
    sums: dict[int, dict[float, np.ndarray]] = {}
    for term in problem.boundary.point_terms:
        per_point = sums.setdefault(term.order, {})
        if term.point in per_point:
            per_point[term.point] = per_point[term.point] + term.matrix
        else:
            per_point[term.point] = term.matrix.copy()
    return sums


def _constant_coefficient(problem: ProblemSpec, d: int) -> np.ndarray:
    fn = problem.coefficients.by_order[d]
    probe = np.linspace(problem.interval.a, problem.interval.b, 7)
    values = fn.eval(probe)
    if np.abs(values - values[0]).max() > 1e-12 * max(1.0, np.abs(values).max()):
        raise CliError("oracle-check needs constant coefficients")
    return values[0]


def _oracle_from_problem(problem: ProblemSpec) -> tuple[str, np.ndarray]:
    """Recognize a constant-coefficient configuration with a closed form."""
    a_point, b_point = problem.interval.a, problem.interval.b
    sums = _collect_point_sums(problem)
    orders = problem.coefficients.max_order

    def stacked(point: float) -> list[np.ndarray]:
        zero = np.zeros((problem.q, problem.m), dtype=complex)
        return [sums.get(k, {}).get(point, zero) for k in range(orders)]

    if problem.r == 1:
        a0 = _constant_coefficient(problem, 0)
        if np.abs(a0).max() == 0.0:
            points = sorted(sums.get(0, {}).keys())
            alphas0 = [sums[0][p] for p in points] if points else [
                np.zeros((problem.q, problem.m), dtype=complex)
            ]
            one_point = all(
                point == a_point for per in sums.values() for point in per
            )
            name = "canonical-first-order" if one_point else "multipoint-zero-coefficient"
            return name, oracle_characteristic("ex2", alphas0=alphas0)
        if any(point != a_point for per in sums.values() for point in per):
            raise CliError(
                "no closed form: first-order problems with a nonzero coefficient "
                "need all boundary points at the left endpoint"
            )
        if problem.boundary.integral_term is not None:
            raise CliError("no closed form: integral terms are only supported when "
                           "the coefficient vanishes")
        return "one-point-first-order", oracle_characteristic(
            "ex1", matrix=a0, alphas=stacked(a_point)
        )
    if problem.r == 2:
        if problem.boundary.integral_term is not None:
            raise CliError("no closed form with an integral term for second order")
        a0 = _constant_coefficient(problem, 0)
        a1 = _constant_coefficient(problem, 1)
        extra = [p for per in sums.values() for p in per if p not in (a_point, b_point)]
        if extra:
            raise CliError("no closed form: second-order configurations are two-point")
        length = problem.interval.length
        if np.abs(a0).max() == 0.0:
            return "two-point-damped", oracle_characteristic(
                "ex3", matrix=a1, alphas=stacked(a_point), betas=stacked(b_point),
                length=length,
            )
        if np.abs(a1).max() == 0.0:
            return "two-point-oscillatory", oracle_characteristic(
                "ex4", matrix=a0, alphas=stacked(a_point), betas=stacked(b_point),
                length=length,
            )
    raise CliError("no closed form known for this configuration")


def _builtin_rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


def _random_complex(rng, rows, cols):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def _builtin_ex1():
    rng = _builtin_rng()
    m = 2
    a = _random_complex(rng, m, m)
    a *= 1.5 / np.abs(a).sum()
    alphas = [_random_complex(rng, m, m) for _ in range(3)]
    coeffs = CoefficientSet(1, m, 2, (a,))
    boundary = BoundaryOperator(
        m, tuple(PointTerm(0.0, k, alphas[k]) for k in range(3))
    )
    problem = ProblemSpec(Interval(0.0, 1.0), coeffs, boundary, LebesgueExponent(2.0))
    return "one-point-first-order", problem, oracle_characteristic(
        "ex1", matrix=a, alphas=alphas
    )


def _builtin_ex2():
    rng = _builtin_rng()
    m = 2
    points = [0.0, 0.3, 0.7, 1.0]
    alphas0 = [_random_complex(rng, m, m) for _ in points]
    higher = [_random_complex(rng, m, m) for _ in points]
    coeffs = CoefficientSet(1, m, 2, (np.zeros((m, m)),))
    terms = [PointTerm(p, 0, mat) for p, mat in zip(points, alphas0)]
    terms += [PointTerm(p, 2, mat) for p, mat in zip(points, higher)]
    boundary = BoundaryOperator(m, tuple(terms))
    problem = ProblemSpec(Interval(0.0, 1.0), coeffs, boundary, LebesgueExponent(2.0))
    return "multipoint-zero-coefficient", problem, oracle_characteristic(
        "ex2", alphas0=alphas0
    )


def _builtin_second_order(damped: bool):
    rng = _builtin_rng()
    m, n = 2, 1
    q = 2 * m
    a = _random_complex(rng, m, m)
    a *= 1.5 / np.abs(a).sum()
    alphas = [_random_complex(rng, q, m) for _ in range(n + 2)]
    betas = [_random_complex(rng, q, m) for _ in range(n + 2)]
    zero = np.zeros((m, m))
    coeffs = CoefficientSet(2, m, n, (zero, a) if damped else (a, zero))
    terms = tuple(PointTerm(0.0, k, alphas[k]) for k in range(n + 2))
    terms += tuple(PointTerm(1.0, k, betas[k]) for k in range(n + 2))
    boundary = BoundaryOperator(q, terms)
    problem = ProblemSpec(Interval(0.0, 1.0), coeffs, boundary, LebesgueExponent(2.0))
    name = "two-point-damped" if damped else "two-point-oscillatory"
    oracle = oracle_characteristic(
        "ex3" if damped else "ex4", matrix=a, alphas=alphas, betas=betas, length=1.0
    )
    return name, problem, oracle


def _builtin_ex5():
    rng = _builtin_rng()
    m, n = 2, 1
    alpha0 = _random_complex(rng, m, m)
    alpha1 = _random_complex(rng, m, m)
    kernel = ConstantFunction(_random_complex(rng, m, m))
    coeffs = CoefficientSet(1, m, n, (np.zeros((m, m)),))
    boundary = BoundaryOperator(
        m,
        (PointTerm(0.0, 0, alpha0), PointTerm(0.0, 1, alpha1)),
        IntegralTerm(kernel),
    )
    problem = ProblemSpec(Interval(0.0, 1.0), coeffs, boundary, LebesgueExponent(2.0))
    return "canonical-first-order", problem, oracle_characteristic("ex5", alpha0=alpha0)


_BUILTINS = {
    "ex1": _builtin_ex1,
    "ex2": _builtin_ex2,
    "ex3": lambda: _builtin_second_order(True),
    "ex4": lambda: _builtin_second_order(False),
    "ex5": _builtin_ex5,
    "one-point-first-order": _builtin_ex1,
    "multipoint-zero-coefficient": _builtin_ex2,
    "two-point-damped": lambda: _builtin_second_order(True),
    "two-point-oscillatory": lambda: _builtin_second_order(False),
    "canonical-first-order": _builtin_ex5,
}


# ---------------------------------------------------------------------------
# argument parsing


def _eps_schedule(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad epsilon schedule {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("epsilon schedule is empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fredholm-bvp",
        description="Solvability analysis of linear ODE boundary-value problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--nodes", type=int, default=DEFAULT_NODE_COUNT,
                       help="grid node count (default %(default)s)")
        p.add_argument("--rank-tol", type=float, default=None,
                       help="singular-value cutoff for the numerical rank")
        p.add_argument("--format", choices=("text", "machine"), default="text",
                       help="report format (default %(default)s)")
        p.add_argument("--out", default=None, help="write the report to a file")

    analyze = sub.add_parser("analyze", help="Fredholm analysis of a problem document")
    analyze.add_argument("document")
    add_common(analyze)
    analyze.set_defaults(handler=_run_analyze)

    solve_cmd = sub.add_parser("solve", help="solve a well-posed problem document")
    solve_cmd.add_argument("document")
    add_common(solve_cmd)
    solve_cmd.set_defaults(handler=_run_solve)

    family = sub.add_parser("family", help="run the parameter-continuity experiment")
    family.add_argument("document")
    add_common(family)
    family.add_argument("--eps-schedule", type=_eps_schedule, default=None,
                        help="comma-separated decreasing schedule, e.g. 1e-1,1e-2")
    family.set_defaults(handler=_run_family)

    oracle = sub.add_parser(
        "oracle-check",
        help="compare the numerical matrix with a closed form "
             f"(builtins: {', '.join(sorted(k for k in _BUILTINS if k.startswith('ex')))})",
    )
    oracle.add_argument("document", help="problem document or builtin name")
    add_common(oracle)
    oracle.set_defaults(handler=_run_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.handler(args)
    except NotWellPosedError as err:
        print(f"not well posed: {err}", file=sys.stderr)
        return EXIT_NOT_WELL_POSED
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except (DocumentError, ExpressionError, ValueError, OSError, FloatingPointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
