"""Parameter-dependent families of problems and their limit behavior.

A family assigns a problem to every parameter value eps in a decreasing
schedule, plus the limit problem at eps = 0.  The same abstraction
serves sequences indexed k -> infinity (set the direction flag); the
checks only care about the ordered schedule.

What is verified, per family:

* condition (0): the limit problem is square and nonsingular;
* condition (I): coefficients converge in the order-n Sobolev norm;
* condition (II): boundary values converge on a finite probe set —
  pointwise operator convergence is undecidable from finitely many
  probes, so the verdict is evidence, not proof;
* convergence of the characteristic matrices and upper semicontinuity
  of kernel/cokernel dimensions;
* convergence of solutions, with the error/discrepancy ratio tabulated
  so its empirical bracket can stand in for the (existential) two-sided
  estimate constants.

Multipoint families get their own assumption checks (point clustering,
coefficient-sum convergence, weighted-norm smallness, zero-series decay)
with the selection rule depending on whether p is finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .boundary import BoundaryOperator, PointTerm
from .characteristic import (
    ProblemSpec,
    build_characteristic_matrix,
    characteristic_from_fundamental,
    solvability_report,
)
from .grid import DerivativeStack, Grid, Interval, LebesgueExponent, lp_norm, sobolev_norm, vector_magnitude
from .ode import CoefficientSet, RightHandSide, combine_homogeneous, fundamental_set, particular_solution
from .solver import NotWellPosedError, discrepancy

DEFAULT_EPSILONS = (1e-1, 1e-2, 1e-3, 1e-4)
VANISH_ABS_TOL = 1e-6
VANISH_DROP_FACTOR = 100.0
BOUNDED_GROWTH_FACTOR = 100.0
RATIO_FLOOR = 1e-13
DEFAULT_SERIES_CAP = 64


def tends_to_zero(values) -> bool:
    """Two-part vanishing rule: small final value and a 100x drop.

    Columns that start already below the absolute tolerance pass without
    the drop requirement (nothing left to decay).
    """
    values = [float(v) for v in values]
    if not values:
        return True
    first, last = values[0], values[-1]
    return last <= VANISH_ABS_TOL and (last * VANISH_DROP_FACTOR <= first or first <= VANISH_ABS_TOL)


def stays_bounded(values) -> bool:
    """O(1) rule on a finite schedule: no 100x growth over the first value."""
    values = [float(v) for v in values]
    if not values:
        return True
    return max(values) <= BOUNDED_GROWTH_FACTOR * (values[0] + 1e-9)


@dataclass(frozen=True)
class TrendTable:
    """One labeled column of per-eps values with its verdict."""

    label: str
    epsilons: tuple[float, ...]
    values: tuple[float, ...]
    passed: bool

    @classmethod
    def vanishing(cls, label, epsilons, values) -> "TrendTable":
        return cls(label, tuple(epsilons), tuple(float(v) for v in values),
                   tends_to_zero(values))

    @classmethod
    def bounded(cls, label, epsilons, values) -> "TrendTable":
        return cls(label, tuple(epsilons), tuple(float(v) for v in values),
                   stays_bounded(values))


@dataclass(frozen=True)
class ConditionReport:
    name: str
    tables: tuple[TrendTable, ...]
    passed: bool


@dataclass(frozen=True)
class ProblemFamily:
    """eps-indexed problems sharing interval, orders and exponent."""

    at_zero: ProblemSpec
    generator: Callable[[float], ProblemSpec]
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    direction: str = "parameter"  # or "sequence" for k -> infinity readings

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0 for e in eps):
            raise ValueError("epsilon schedule must be positive")
        if any(later >= earlier for later, earlier in zip(eps[1:], eps)):
            raise ValueError("epsilon schedule must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)

    def at(self, eps: float) -> ProblemSpec:
        if eps == 0:
            return self.at_zero
        member = self.generator(eps)
        if (member.r, member.m, member.n) != (self.at_zero.r, self.at_zero.m, self.at_zero.n):
            raise ValueError("family members must share the orders (r, m, n)")
        if member.interval != self.at_zero.interval:
            raise ValueError("family members must share the interval")
        if member.exponent != self.at_zero.exponent:
            raise ValueError("family members must share the integrability exponent")
        return member


def check_condition_0(problem: ProblemSpec, grid: Grid,
                      rank_tolerance: float | None = None) -> bool:
    """True iff the limit problem is square with a nonsingular matrix."""
    if problem.q != problem.state_size:
        return False
    matrix = build_characteristic_matrix(problem, grid, rank_tolerance)
    return matrix.numerical_rank == problem.state_size


def coefficient_distances(problem_eps: ProblemSpec, problem_zero: ProblemSpec,
                          grid: Grid) -> list[float]:
    """Order-n Sobolev distance of each coefficient matrix, by order d."""
    n = problem_zero.n
    distances = []
    for d in range(problem_zero.r):
        total = 0.0
        for k in range(n + 1):
            diff = (problem_eps.coefficients.by_order[d].eval(grid.nodes, order=k)
                    - problem_zero.coefficients.by_order[d].eval(grid.nodes, order=k))
            total += lp_norm(diff, problem_zero.exponent, grid)
        distances.append(total)
    return distances


def check_condition_I(family: ProblemFamily, grid: Grid) -> ConditionReport:
    """Coefficient convergence tables, one per derivative order d."""
    rows = [coefficient_distances(family.at(eps), family.at_zero, grid)
            for eps in family.epsilons]
    tables = []
    for d in range(family.at_zero.r):
        tables.append(TrendTable.vanishing(
            f"coefficient of y^({d})", family.epsilons, [row[d] for row in rows]
        ))
    return ConditionReport("condition-I", tuple(tables), all(t.passed for t in tables))


def default_probes(grid: Grid, dimension: int, max_order: int) -> list[DerivativeStack]:
    """Smooth probe stacks: {1, t, t^2, sin t, cos t} x coordinate vectors."""
    ts = grid.nodes
    zero = np.zeros_like(ts)
    one = np.ones_like(ts)

    def poly_rows(degree):
        rows = []
        for k in range(max_order + 1):
            if k > degree:
                rows.append(zero)
            else:
                factor = 1.0
                for i in range(k):
                    factor *= degree - i
                rows.append(factor * ts ** (degree - k))
        return rows

    def trig_rows(start):  # start=0 for sin, 1 for cos; derivatives cycle
        table = [np.sin(ts), np.cos(ts), -np.sin(ts), -np.cos(ts)]
        return [table[(start + k) % 4] for k in range(max_order + 1)]

    profiles = [poly_rows(0), poly_rows(1), poly_rows(2), trig_rows(0), trig_rows(1)]
    probes = []
    for rows in profiles:
        scalar = np.stack(rows)
        for j in range(dimension):
            samples = np.zeros((max_order + 1, grid.count, dimension), dtype=complex)
            samples[:, :, j] = scalar
            probes.append(DerivativeStack(grid, samples))
    return probes


def check_condition_II(family: ProblemFamily, grid: Grid,
                       extra_probes: list[DerivativeStack] | None = None) -> ConditionReport:
    """Boundary-value convergence on the probe set, table per probe.

    The default polynomial/trigonometric probes are always evaluated;
    user probes extend the set.
    """
    zero = family.at_zero
    probes = default_probes(grid, zero.m, zero.coefficients.max_order)
    if extra_probes:
        probes = probes + list(extra_probes)
    reference = [zero.boundary.apply(probe) for probe in probes]
    columns = [[] for _ in probes]
    for eps in family.epsilons:
        member = family.at(eps)
        for i, probe in enumerate(probes):
            columns[i].append(vector_magnitude(member.boundary.apply(probe) - reference[i]))
    tables = tuple(
        TrendTable.vanishing(f"probe {i}", family.epsilons, column)
        for i, column in enumerate(columns)
    )
    return ConditionReport("condition-II", tables, all(t.passed for t in tables))


def characteristic_convergence(family: ProblemFamily, grid: Grid,
                               rank_tolerance: float | None = None) -> TrendTable:
    """Entrywise-max distance of the characteristic matrices per eps."""
    limit = build_characteristic_matrix(family.at_zero, grid, rank_tolerance)
    values = []
    for eps in family.epsilons:
        member = build_characteristic_matrix(family.at(eps), grid, rank_tolerance)
        values.append(float(np.abs(member.entries - limit.entries).max()))
    return TrendTable.vanishing("characteristic matrix", family.epsilons, values)


@dataclass(frozen=True)
class SemicontinuityReport:
    """Kernel/cokernel dimensions along the schedule vs. the limit."""

    epsilons: tuple[float, ...]
    dim_kernel_limit: int
    dim_cokernel_limit: int
    rows: tuple[tuple[float, int, int], ...]
    threshold: float | None
    violations: tuple[float, ...]
    passed: bool


def semicontinuity_check(family: ProblemFamily, grid: Grid,
                         rank_tolerance: float | None = None) -> SemicontinuityReport:
    """Check dim ker / dim coker never exceed their limit values.

    The threshold is the largest scheduled eps below which (inclusive)
    every scheduled value satisfies both inequalities.
    """
    zero = family.at_zero
    limit_matrix = build_characteristic_matrix(zero, grid, rank_tolerance)
    limit_report = solvability_report(limit_matrix, zero)
    rows = []
    ok = []
    for eps in family.epsilons:
        member = family.at(eps)
        matrix = build_characteristic_matrix(member, grid, rank_tolerance)
        report = solvability_report(matrix, member)
        rows.append((eps, report.dim_kernel, report.dim_cokernel))
        ok.append(report.dim_kernel <= limit_report.dim_kernel
                  and report.dim_cokernel <= limit_report.dim_cokernel)
    threshold = None
    for i in range(len(ok)):
        if all(ok[i:]):
            threshold = family.epsilons[i]
            break
    violations = tuple(eps for (eps, _, _), good in zip(rows, ok) if not good)
    return SemicontinuityReport(
        epsilons=family.epsilons,
        dim_kernel_limit=limit_report.dim_kernel,
        dim_cokernel_limit=limit_report.dim_cokernel,
        rows=tuple(rows),
        threshold=threshold,
        violations=violations,
        passed=not violations,
    )


# ---------------------------------------------------------------------------
# multipoint families


@dataclass(frozen=True)
class MultipointSeries:
    """One series of eps-dependent boundary points and matrices.

    ``points(eps)`` has shape (omega,), ``matrices(eps)`` has shape
    (omega, orders, q, m): one q x m matrix per point and derivative
    order.  Converging series (j >= 1) declare the limit point and the
    limit matrices; the zero series declares neither, and is admissible
    only when its coefficient norms vanish in the limit.
    """

    points: Callable[[float], np.ndarray]
    matrices: Callable[[float], np.ndarray]
    limit_point: float | None = None
    limit_matrices: np.ndarray | None = None

    @property
    def is_zero_series(self) -> bool:
        return self.limit_point is None

    def __post_init__(self):
        if (self.limit_point is None) != (self.limit_matrices is None):
            raise ValueError("declare both limit point and limit matrices, or neither")


@dataclass(frozen=True)
class MultipointFamily:
    """Boundary series plus the eps-dependent boundary data vector."""

    series: tuple[MultipointSeries, ...]
    data: Callable[[float], np.ndarray] | None = None
    series_cap: int = DEFAULT_SERIES_CAP

    def _terms_at(self, eps: float) -> list[tuple[float, int, np.ndarray]]:
        terms = []
        if eps == 0:
            for s in self.series:
                if s.is_zero_series:
                    continue
                for d, matrix in enumerate(np.asarray(s.limit_matrices)):
                    terms.append((float(s.limit_point), d, matrix))
        else:
            for s in self.series:
                points = np.asarray(s.points(eps), dtype=float)
                matrices = np.asarray(s.matrices(eps), dtype=complex)
                if points.shape[0] != matrices.shape[0]:
                    raise ValueError("series points and matrices disagree in count")
                if points.shape[0] > self.series_cap:
                    raise ValueError(
                        f"series size {points.shape[0]} exceeds the cap {self.series_cap}"
                    )
                for k, point in enumerate(points):
                    for d in range(matrices.shape[1]):
                        terms.append((float(point), d, matrices[k, d]))
        return terms

    def boundary_at(self, eps: float) -> BoundaryOperator:
        terms = self._terms_at(eps)
        if not terms:
            raise ValueError(
                "no boundary terms at this parameter value; a family needs "
                "at least one converging series"
            )
        codomain = terms[0][2].shape[0]
        point_terms = tuple(
            PointTerm(point, order, matrix) for point, order, matrix in terms
        )
        return BoundaryOperator(codomain, point_terms)


@dataclass(frozen=True)
class AssumptionTable:
    name: str
    kind: str  # "vanish" or "bounded"
    rows: tuple[tuple[str, tuple[float, ...]], ...]
    passed: bool


@dataclass(frozen=True)
class MultipointAssumptionReport:
    epsilons: tuple[float, ...]
    tables: dict[str, AssumptionTable]
    required: tuple[str, ...]
    passed: bool


def _matrix_norm(matrix: np.ndarray) -> float:
    return float(np.abs(matrix).sum())


def check_multipoint_assumptions(family: MultipointFamily, p: LebesgueExponent,
                                 epsilons=DEFAULT_EPSILONS) -> MultipointAssumptionReport:
    """Evaluate the clustering/decay assumptions over the schedule.

    For p = inf the required set is {point-clustering, coefficient-sum,
    weighted-decay, zero-series}; for finite p the weighted-decay
    requirement splits into a boundedness condition on the top
    derivative order (with the conjugate-exponent weight) and a decay
    condition on the lower orders.
    """
    epsilons = tuple(float(e) for e in epsilons)
    columns: dict[str, dict[str, list[float]]] = {
        key: {} for key in ("alpha", "beta", "gamma", "delta", "gamma_p", "gamma_prime")
    }

    def put(table: str, label: str, value: float):
        columns[table].setdefault(label, []).append(value)

    conj = p.conjugate
    weight_exponent = 0.0 if np.isinf(conj) else 1.0 / conj
    for eps in epsilons:
        for j, series in enumerate(family.series):
            points = np.asarray(series.points(eps), dtype=float)
            matrices = np.asarray(series.matrices(eps), dtype=complex)
            orders = matrices.shape[1]
            if series.is_zero_series:
                for d in range(orders):
                    put("delta", f"series {j} order {d}",
                        sum(_matrix_norm(matrices[k, d]) for k in range(len(points))))
                continue
            offsets = np.abs(points - series.limit_point)
            put("alpha", f"series {j}", float(offsets.max()) if len(points) else 0.0)
            limits = np.asarray(series.limit_matrices, dtype=complex)
            for d in range(orders):
                put("beta", f"series {j} order {d}",
                    _matrix_norm(matrices[:, d].sum(axis=0) - limits[d]))
                weighted = sum(
                    _matrix_norm(matrices[k, d]) * offsets[k] for k in range(len(points))
                )
                put("gamma", f"series {j} order {d}", weighted)
                if d == orders - 1:
                    put("gamma_p", f"series {j} order {d}", sum(
                        _matrix_norm(matrices[k, d]) * offsets[k] ** weight_exponent
                        for k in range(len(points))
                    ))
                else:
                    put("gamma_prime", f"series {j} order {d}", weighted)

    tables = {}
    for name, rows in columns.items():
        kind = "bounded" if name == "gamma_p" else "vanish"
        judge = stays_bounded if kind == "bounded" else tends_to_zero
        table_rows = tuple((label, tuple(values)) for label, values in rows.items())
        passed = all(judge(values) for _, values in table_rows)
        tables[name] = AssumptionTable(name, kind, table_rows, passed)

    if p.is_infinite:
        required = ("alpha", "beta", "gamma", "delta")
    else:
        required = ("alpha", "beta", "gamma_p", "gamma_prime", "delta")
    passed = all(tables[name].passed for name in required)
    return MultipointAssumptionReport(epsilons, tables, required, passed)


def multipoint_problem_family(family: MultipointFamily, interval: Interval,
                              coefficients: CoefficientSet, exponent: LebesgueExponent,
                              f, epsilons=DEFAULT_EPSILONS) -> ProblemFamily:
    """Wrap a multipoint family into a full problem family.

    The equation side is eps-independent here; the boundary operator and
    boundary data vary with eps.  ``family.data`` must be present so the
    members can be solved.
    """
    if family.data is None:
        raise ValueError("multipoint family needs the boundary data vector to build problems")

    def build(eps: float) -> ProblemSpec:
        boundary = family.boundary_at(eps)
        rhs = RightHandSide(f, family.data(eps))
        return ProblemSpec(interval, coefficients, boundary, exponent, rhs)

    return ProblemFamily(at_zero=build(0.0), generator=build, epsilons=tuple(epsilons))


# ---------------------------------------------------------------------------
# the convergence experiment


@dataclass(frozen=True)
class LimitRow:
    eps: float
    coefficient_distances: tuple[float, ...]
    matrix_distance: float
    dim_kernel: int
    dim_cokernel: int
    well_posed: bool
    solution_error: float | None
    discrepancy: float | None
    ratio: float | None
    flags: tuple[str, ...]


@dataclass(frozen=True)
class LimitReport:
    """Everything the experiment measured, one row per scheduled eps."""

    epsilons: tuple[float, ...]
    rows: tuple[LimitRow, ...]
    condition_0: bool
    condition_I: ConditionReport
    condition_II: ConditionReport
    characteristic_trend: TrendTable
    error_trend_passed: bool
    ratio_bracket: tuple[float, float] | None
    multipoint: MultipointAssumptionReport | None = None

    def to_text(self) -> str:
        lines = []
        header = (f"{'eps':>12}  {'coeff dist':>12}  {'|dM|':>12}  {'ker':>3}  "
                  f"{'coker':>5}  {'error':>12}  {'discrepancy':>12}  {'ratio':>12}  flags")
        lines.append(header)
        for row in self.rows:
            coeff = max(row.coefficient_distances) if row.coefficient_distances else 0.0
            lines.append(
                f"{row.eps:>12.4e}  {coeff:>12.4e}  {row.matrix_distance:>12.4e}  "
                f"{row.dim_kernel:>3d}  {row.dim_cokernel:>5d}  "
                f"{_fmt(row.solution_error):>12}  {_fmt(row.discrepancy):>12}  "
                f"{_fmt(row.ratio):>12}  {','.join(row.flags)}"
            )
        lines.append("")
        lines.append(f"condition (0): {'pass' if self.condition_0 else 'FAIL'}")
        lines.append(f"condition (I): {'pass' if self.condition_I.passed else 'FAIL'}")
        lines.append(f"condition (II): {'pass' if self.condition_II.passed else 'FAIL'}")
        lines.append(
            "characteristic convergence: "
            f"{'pass' if self.characteristic_trend.passed else 'FAIL'}"
        )
        lines.append(f"solution convergence: {'pass' if self.error_trend_passed else 'FAIL'}")
        if self.ratio_bracket is not None:
            lines.append(
                f"error/discrepancy ratio bracket: [{self.ratio_bracket[0]:.4e}, "
                f"{self.ratio_bracket[1]:.4e}]"
            )
        if self.multipoint is not None:
            lines.append(
                "multipoint assumptions "
                f"({', '.join(self.multipoint.required)}): "
                f"{'pass' if self.multipoint.passed else 'FAIL'}"
            )
        return "\n".join(lines)

    def to_document(self) -> dict:
        doc = {
            "epsilons": list(self.epsilons),
            "rows": [
                {
                    "eps": row.eps,
                    "coefficient_distances": list(row.coefficient_distances),
                    "matrix_distance": row.matrix_distance,
                    "dim_kernel": row.dim_kernel,
                    "dim_cokernel": row.dim_cokernel,
                    "well_posed": row.well_posed,
                    "solution_error": row.solution_error,
                    "discrepancy": row.discrepancy,
                    "ratio": row.ratio,
                    "flags": list(row.flags),
                }
                for row in self.rows
            ],
            "condition_0": self.condition_0,
            "condition_I": _condition_doc(self.condition_I),
            "condition_II": _condition_doc(self.condition_II),
            "characteristic_convergence": {
                "values": list(self.characteristic_trend.values),
                "passed": self.characteristic_trend.passed,
            },
            "solution_convergence": self.error_trend_passed,
            "ratio_bracket": list(self.ratio_bracket) if self.ratio_bracket else None,
        }
        if self.multipoint is not None:
            doc["multipoint_assumptions"] = {
                "required": list(self.multipoint.required),
                "passed": self.multipoint.passed,
                "tables": {
                    name: {
                        "kind": table.kind,
                        "rows": {label: list(values) for label, values in table.rows},
                        "passed": table.passed,
                    }
                    for name, table in self.multipoint.tables.items()
                },
            }
        return doc


def _fmt(value) -> str:
    return f"{value:.4e}" if value is not None else "-"


def _condition_doc(report: ConditionReport) -> dict:
    return {
        "passed": report.passed,
        "tables": {
            table.label: {"values": list(table.values), "passed": table.passed}
            for table in report.tables
        },
    }


def convergence_experiment(family: ProblemFamily, grid: Grid,
                           extra_probes: list[DerivativeStack] | None = None,
                           rank_tolerance: float | None = None,
                           multipoint: MultipointFamily | None = None) -> LimitReport:
    """Solve the family along the schedule and tabulate all limit data.

    Requires the limit problem to be square and nonsingular (raises
    NotWellPosedError otherwise).  Rows whose member problem is not well
    posed are flagged but the experiment continues: well-posedness is
    only guaranteed for sufficiently small eps.
    """
    zero = family.at_zero
    if zero.rhs is None:
        raise ValueError("the limit problem needs a right-hand side for the experiment")
    fset_zero = fundamental_set(zero.coefficients, grid)
    matrix_zero = characteristic_from_fundamental(zero, fset_zero, rank_tolerance)
    report_zero = solvability_report(matrix_zero, zero)
    if not report_zero.well_posed:
        raise NotWellPosedError(report_zero, matrix_zero)

    y_particular = particular_solution(zero.coefficients, zero.rhs.f, grid)
    weights = np.linalg.solve(matrix_zero.entries,
                              zero.rhs.c - zero.boundary.apply(y_particular))
    y_zero = y_particular + combine_homogeneous(fset_zero, weights)

    condition_I = check_condition_I(family, grid)
    condition_II = check_condition_II(family, grid, extra_probes)

    rows = []
    matrix_values = []
    errors = []
    ratios = []
    for eps in family.epsilons:
        member = family.at(eps)
        fset = fundamental_set(member.coefficients, grid)
        matrix = characteristic_from_fundamental(member, fset, rank_tolerance)
        report = solvability_report(matrix, member)
        distances = tuple(coefficient_distances(member, zero, grid))
        matrix_distance = float(np.abs(matrix.entries - matrix_zero.entries).max())
        matrix_values.append(matrix_distance)
        flags = []
        error = None
        disc = None
        ratio = None
        if member.rhs is not None:
            disc = discrepancy(member, y_zero)
        if report.well_posed and member.rhs is not None:
            y_p = particular_solution(member.coefficients, member.rhs.f, grid)
            w = np.linalg.solve(matrix.entries, member.rhs.c - member.boundary.apply(y_p))
            y_eps = y_p + combine_homogeneous(fset, w)
            error = sobolev_norm(y_eps - y_zero, zero.exponent)
            errors.append(error)
            if disc is not None and disc > RATIO_FLOOR * (1.0 + error):
                ratio = error / disc
                ratios.append(ratio)
            else:
                flags.append("degenerate-ratio")
        else:
            flags.append("not-well-posed")
        rows.append(LimitRow(
            eps=eps,
            coefficient_distances=distances,
            matrix_distance=matrix_distance,
            dim_kernel=report.dim_kernel,
            dim_cokernel=report.dim_cokernel,
            well_posed=report.well_posed,
            solution_error=error,
            discrepancy=disc,
            ratio=ratio,
            flags=tuple(flags),
        ))

    characteristic_trend = TrendTable.vanishing(
        "characteristic matrix", family.epsilons, matrix_values
    )
    error_trend_passed = bool(errors) and len(errors) == len(family.epsilons) \
        and tends_to_zero(errors)
    bracket = (min(ratios), max(ratios)) if ratios else None
    multipoint_report = None
    if multipoint is not None:
        multipoint_report = check_multipoint_assumptions(
            multipoint, zero.exponent, family.epsilons
        )
    return LimitReport(
        epsilons=family.epsilons,
        rows=tuple(rows),
        condition_0=True,
        condition_I=condition_I,
        condition_II=condition_II,
        characteristic_trend=characteristic_trend,
        error_trend_passed=error_trend_passed,
        ratio_bracket=bracket,
        multipoint=multipoint_report,
    )
