"""Problem documents: JSON ingestion, validation and model building.

A document describes one boundary-value problem and, optionally, an
eps-indexed family of perturbations of it.  Scalars are numbers or
``[re, im]`` pairs (never strings); the places where a *function* is
expected take one of three payload kinds:

* ``{"kind": "constant", "values": ...}`` — a number matrix/vector;
* ``{"kind": "expression", "entries": ...}`` — entrywise expression
  strings in ``t`` (``"polynomial"`` is accepted as an alias);
* ``{"kind": "table", "nodes": [...], "samples": ...}`` — samples per
  derivative order on a uniform grid.

Inside the optional ``family`` section, expression strings may also use
``eps``, and additionally the boundary-point locations, boundary-point
matrices and the boundary data vector may be written as expression
strings in ``eps``.  The family's limit problem is the ``eps = 0``
evaluation of its generators, so generators must stay finite there.

The full schema is documented in docs/problem-document.md with complete
sample files next to it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expressions as ex
from .boundary import BoundaryOperator, IntegralTerm, PointTerm
from .characteristic import ProblemSpec
from .functions import ArrayFunction, ConstantFunction, ExpressionFunction, TabulatedFunction
from .grid import Grid, Interval, LebesgueExponent
from .limits import DEFAULT_EPSILONS, MultipointFamily, MultipointSeries, ProblemFamily
from .ode import CoefficientSet, RightHandSide


class DocumentError(ValueError):
    """Schema violation, with the JSON path of the offending element."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# scalar slots: a number now, or an expression in eps resolved later


def _parse_scalar_slot(raw, path: str, eps_ok: bool):
    if isinstance(raw, bool):
        raise DocumentError("expected a number, got a boolean", path)
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, list):
        if len(raw) != 2 or not all(isinstance(x, (int, float)) for x in raw):
            raise DocumentError("complex scalars are [re, im] pairs of numbers", path)
        return complex(raw[0], raw[1])
    if isinstance(raw, str):
        if not eps_ok:
            raise DocumentError(
                "expression strings are only allowed inside the family section here", path
            )
        try:
            tree = ex.parse_expression(raw)
        except ex.ExpressionError as err:
            raise DocumentError(f"bad expression: {err}", path) from None
        if ex.uses_variable(tree, "t"):
            raise DocumentError("this slot is a number, not a function of t", path)
        return tree
    raise DocumentError(f"expected a scalar, got {type(raw).__name__}", path)


def _resolve_slot(slot, eps: float | None) -> complex:
    if isinstance(slot, complex):
        return slot
    try:
        value = complex(ex.evaluate(slot, eps=eps))
    except ZeroDivisionError:
        value = complex("nan")
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise DocumentError(
            f"expression {ex.to_source(slot)!r} is not finite at eps={eps}"
        )
    return value


def _slot_to_json(slot):
    if isinstance(slot, complex):
        return [slot.real, slot.imag]
    return ex.to_source(slot)


def _parse_slot_array(raw, path: str, shape: tuple[int, ...], eps_ok: bool) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    if len(shape) == 1:
        if not isinstance(raw, list) or len(raw) != shape[0]:
            raise DocumentError(f"expected a list of length {shape[0]}", path)
        for i, item in enumerate(raw):
            arr[i] = _parse_scalar_slot(item, f"{path}[{i}]", eps_ok)
        return arr
    if not isinstance(raw, list) or len(raw) != shape[0]:
        raise DocumentError(f"expected {shape[0]} rows", path)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise DocumentError(f"expected a row of length {shape[1]}", f"{path}[{i}]")
        for j, item in enumerate(row):
            arr[i, j] = _parse_scalar_slot(item, f"{path}[{i}][{j}]", eps_ok)
    return arr


def _resolve_slot_array(arr: np.ndarray, eps: float | None) -> np.ndarray:
    out = np.empty(arr.shape, dtype=complex)
    for idx in np.ndindex(arr.shape):
        out[idx] = _resolve_slot(arr[idx], eps)
    return out


def _slot_array_to_json(arr: np.ndarray):
    if arr.ndim == 1:
        return [_slot_to_json(s) for s in arr]
    return [[_slot_to_json(s) for s in row] for row in arr]


# ---------------------------------------------------------------------------
# function payloads

_FUNCTION_KINDS = ("constant", "expression", "table")


@dataclass(frozen=True)
class FunctionDoc:
    """A parsed function payload; ``build`` turns it into an ArrayFunction."""

    kind: str
    constant: np.ndarray | None = None
    entries: np.ndarray | None = None  # object array of Expression
    nodes: np.ndarray | None = None
    samples: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        if self.kind == "constant":
            return self.constant.shape
        if self.kind == "expression":
            return self.entries.shape
        return self.samples.shape[2:]

    def build(self, eps: float | None) -> ArrayFunction:
        if self.kind == "constant":
            return ConstantFunction(self.constant)
        if self.kind == "expression":
            return ExpressionFunction(self.entries, eps=eps)
        grid = Grid(Interval(float(self.nodes[0]), float(self.nodes[-1])), self.nodes)
        return TabulatedFunction(grid, self.samples)

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant",
                    "values": _complex_array_to_json(self.constant)}
        if self.kind == "expression":
            entries = self.entries
            if entries.ndim == 1:
                rendered = [ex.to_source(e) for e in entries]
            else:
                rendered = [[ex.to_source(e) for e in row] for row in entries]
            return {"kind": "expression", "entries": rendered}
        return {
            "kind": "table",
            "nodes": [float(t) for t in self.nodes],
            "samples": _complex_array_to_json(self.samples),
        }


def _complex_array_to_json(arr: np.ndarray):
    if arr.ndim == 0:
        value = complex(arr)
        return [value.real, value.imag]
    return [_complex_array_to_json(sub) for sub in arr]


def _parse_complex_array(raw, path: str, shape: tuple[int, ...]) -> np.ndarray:
    out = np.empty(shape, dtype=complex)
    if len(shape) == 0:
        out[()] = _parse_scalar_slot(raw, path, eps_ok=False)
        return out
    if not isinstance(raw, list) or len(raw) != shape[0]:
        raise DocumentError(f"expected a list of length {shape[0]}", path)
    for i, item in enumerate(raw):
        out[i] = _parse_complex_array(item, f"{path}[{i}]", shape[1:])
    return out


def _parse_function(raw, path: str, shape: tuple[int, ...], eps_ok: bool) -> FunctionDoc:
    if not isinstance(raw, dict):
        raise DocumentError("expected a function object with a 'kind' field", path)
    kind = raw.get("kind")
    if kind == "polynomial":
        kind = "expression"
    if kind not in _FUNCTION_KINDS:
        raise DocumentError(
            f"kind must be one of {', '.join(_FUNCTION_KINDS)} (or 'polynomial')", path
        )
    if kind == "constant":
        values = _require(raw, "values", path)
        return FunctionDoc("constant", constant=_parse_complex_array(values, f"{path}.values", shape))
    if kind == "expression":
        entries_raw = _require(raw, "entries", path)
        entries = np.empty(shape, dtype=object)
        if len(shape) == 1:
            if not isinstance(entries_raw, list) or len(entries_raw) != shape[0]:
                raise DocumentError(f"expected {shape[0]} entries", f"{path}.entries")
            items = [((i,), entries_raw[i]) for i in range(shape[0])]
        else:
            if not isinstance(entries_raw, list) or len(entries_raw) != shape[0]:
                raise DocumentError(f"expected {shape[0]} rows", f"{path}.entries")
            items = []
            for i, row in enumerate(entries_raw):
                if not isinstance(row, list) or len(row) != shape[1]:
                    raise DocumentError(f"expected a row of length {shape[1]}",
                                        f"{path}.entries[{i}]")
                items.extend(((i, j), row[j]) for j in range(shape[1]))
        for idx, source in items:
            if not isinstance(source, str):
                raise DocumentError("expression entries are strings",
                                    f"{path}.entries{list(idx)}")
            try:
                tree = ex.parse_expression(source)
            except ex.ExpressionError as err:
                raise DocumentError(f"bad expression: {err}",
                                    f"{path}.entries{list(idx)}") from None
            if not eps_ok and ex.uses_variable(tree, "eps"):
                raise DocumentError("eps is only allowed inside the family section",
                                    f"{path}.entries{list(idx)}")
            entries[idx] = tree
        return FunctionDoc("expression", entries=entries)
    nodes_raw = _require(raw, "nodes", path)
    if not isinstance(nodes_raw, list) or len(nodes_raw) < 2:
        raise DocumentError("table nodes must be a list of at least two numbers", f"{path}.nodes")
    nodes = np.asarray([float(t) for t in nodes_raw])
    samples_raw = _require(raw, "samples", path)
    if not isinstance(samples_raw, list) or not samples_raw:
        raise DocumentError("table samples must be a non-empty list (one entry per order)",
                            f"{path}.samples")
    orders = len(samples_raw)
    samples = _parse_complex_array(samples_raw, f"{path}.samples",
                                   (orders, nodes.size, *shape))
    return FunctionDoc("table", nodes=nodes, samples=samples)


# ---------------------------------------------------------------------------
# document sections


@dataclass(frozen=True)
class PointDoc:
    location: object  # scalar slot
    order: int
    matrix: np.ndarray  # object array of slots, (q, m)
    series: int | None = None

    def to_json(self) -> dict:
        out = {"t": _slot_to_json(self.location), "order": self.order,
               "matrix": _slot_array_to_json(self.matrix)}
        if self.series is not None:
            out["series"] = self.series
        return out


@dataclass(frozen=True)
class BoundaryDoc:
    conditions: int
    points: tuple[PointDoc, ...]
    integral: FunctionDoc | None = None

    def to_json(self) -> dict:
        out = {"conditions": self.conditions,
               "points": [p.to_json() for p in self.points]}
        if self.integral is not None:
            out["integral"] = {"kernel": self.integral.to_json()}
        return out


@dataclass(frozen=True)
class RhsDoc:
    f: FunctionDoc
    c: np.ndarray  # object array of slots, (q,)

    def to_json(self) -> dict:
        return {"f": self.f.to_json(), "c": _slot_array_to_json(self.c)}


@dataclass(frozen=True)
class FamilyDoc:
    schedule: tuple[float, ...]
    coefficients: tuple[FunctionDoc, ...] | None = None
    boundary: BoundaryDoc | None = None
    rhs: RhsDoc | None = None

    def to_json(self) -> dict:
        out: dict = {"schedule": list(self.schedule)}
        if self.coefficients is not None:
            out["coefficients"] = [c.to_json() for c in self.coefficients]
        if self.boundary is not None:
            out["boundary"] = self.boundary.to_json()
        if self.rhs is not None:
            out["rhs"] = self.rhs.to_json()
        return out


@dataclass(frozen=True)
class ProblemDocument:
    interval: Interval
    r: int
    m: int
    n: int
    exponent: LebesgueExponent
    coefficients: tuple[FunctionDoc, ...]
    boundary: BoundaryDoc
    rhs: RhsDoc | None = None
    family: FamilyDoc | None = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "interval": {"a": self.interval.a, "b": self.interval.b},
            "orders": {"r": self.r, "m": self.m, "n": self.n},
            "exponent": "inf" if self.exponent.is_infinite else self.exponent.value,
            "coefficients": [c.to_json() for c in self.coefficients],
            "boundary": self.boundary.to_json(),
        }
        if self.rhs is not None:
            out["rhs"] = self.rhs.to_json()
        if self.family is not None:
            out["family"] = self.family.to_json()
        return out


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise DocumentError(f"missing required field {key!r}", path)
    return mapping[key]


def _integer(raw, path: str, minimum: int) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise DocumentError("expected an integer", path)
    if raw < minimum:
        raise DocumentError(f"must be at least {minimum}", path)
    return raw


def _parse_boundary(raw, path: str, m: int, top_order: int,
                    eps_ok: bool) -> BoundaryDoc:
    if not isinstance(raw, dict):
        raise DocumentError("expected a boundary object", path)
    conditions = _integer(_require(raw, "conditions", path), f"{path}.conditions", 1)
    points_raw = raw.get("points", [])
    if not isinstance(points_raw, list):
        raise DocumentError("points must be a list", f"{path}.points")
    points = []
    for i, item in enumerate(points_raw):
        ppath = f"{path}.points[{i}]"
        if not isinstance(item, dict):
            raise DocumentError("expected a point-term object", ppath)
        location = _parse_scalar_slot(_require(item, "t", ppath), f"{ppath}.t", eps_ok)
        order_raw = _require(item, "order", ppath)
        if isinstance(order_raw, float) and not order_raw.is_integer():
            raise DocumentError(
                f"fractional derivative order {order_raw} is not supported "
                "(integer orders only)", f"{ppath}.order")
        order = _integer(int(order_raw), f"{ppath}.order", 0)
        if order > top_order - 1:
            raise DocumentError(
                f"order {order} out of range 0..{top_order - 1}", f"{ppath}.order")
        matrix = _parse_slot_array(_require(item, "matrix", ppath), f"{ppath}.matrix",
                                   (conditions, m), eps_ok)
        series = item.get("series")
        if series is not None:
            series = _integer(series, f"{ppath}.series", 0)
        points.append(PointDoc(location, order, matrix, series))
    integral = None
    if "integral" in raw and raw["integral"] is not None:
        ipath = f"{path}.integral"
        if not isinstance(raw["integral"], dict):
            raise DocumentError("expected an integral-term object", ipath)
        integral = _parse_function(_require(raw["integral"], "kernel", ipath),
                                   f"{ipath}.kernel", (conditions, m), eps_ok)
    return BoundaryDoc(conditions, tuple(points), integral)


def _parse_rhs(raw, path: str, m: int, q: int, eps_ok: bool) -> RhsDoc:
    if not isinstance(raw, dict):
        raise DocumentError("expected an rhs object", path)
    f = _parse_function(_require(raw, "f", path), f"{path}.f", (m,), eps_ok)
    c = _parse_slot_array(_require(raw, "c", path), f"{path}.c", (q,), eps_ok)
    return RhsDoc(f, c)


def load_document(source) -> ProblemDocument:
    """Parse and validate a document from a dict, JSON text or file path."""
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            raw = json.loads(Path(source).read_text())
        except OSError as err:
            raise DocumentError(f"cannot read {source}: {err}") from None
        except json.JSONDecodeError as err:
            raise DocumentError(f"invalid JSON in {source}: {err}") from None
    elif isinstance(source, (str, Path)):
        try:
            raw = json.loads(str(source))
        except json.JSONDecodeError as err:
            raise DocumentError(f"invalid JSON: {err}") from None
    else:
        raw = source
    if not isinstance(raw, dict):
        raise DocumentError("document root must be an object")

    interval_raw = _require(raw, "interval", "$")
    if not isinstance(interval_raw, dict):
        raise DocumentError("expected an object with 'a' and 'b'", "$.interval")
    try:
        interval = Interval(float(_require(interval_raw, "a", "$.interval")),
                            float(_require(interval_raw, "b", "$.interval")))
    except (TypeError, ValueError) as err:
        raise DocumentError(str(err), "$.interval") from None

    orders_raw = _require(raw, "orders", "$")
    if not isinstance(orders_raw, dict):
        raise DocumentError("expected an object with 'r', 'm' and 'n'", "$.orders")
    r = _integer(_require(orders_raw, "r", "$.orders"), "$.orders.r", 1)
    m = _integer(_require(orders_raw, "m", "$.orders"), "$.orders.m", 1)
    n = _integer(_require(orders_raw, "n", "$.orders"), "$.orders.n", 0)

    try:
        exponent = LebesgueExponent.parse(_require(raw, "exponent", "$"))
    except ValueError as err:
        raise DocumentError(str(err), "$.exponent") from None

    coeff_raw = _require(raw, "coefficients", "$")
    if not isinstance(coeff_raw, list) or len(coeff_raw) != r:
        raise DocumentError(
            f"expected {r} coefficient functions (index d multiplies the order-d derivative)",
            "$.coefficients")
    coefficients = tuple(
        _parse_function(item, f"$.coefficients[{d}]", (m, m), eps_ok=False)
        for d, item in enumerate(coeff_raw)
    )

    boundary = _parse_boundary(_require(raw, "boundary", "$"), "$.boundary",
                               m, n + r, eps_ok=False)

    rhs = None
    if raw.get("rhs") is not None:
        rhs = _parse_rhs(raw["rhs"], "$.rhs", m, boundary.conditions, eps_ok=False)

    family = None
    if raw.get("family") is not None:
        fam_raw = raw["family"]
        if not isinstance(fam_raw, dict):
            raise DocumentError("expected a family object", "$.family")
        schedule_raw = fam_raw.get("schedule", list(DEFAULT_EPSILONS))
        if not isinstance(schedule_raw, list) or not schedule_raw:
            raise DocumentError("schedule must be a non-empty list", "$.family.schedule")
        schedule = tuple(float(e) for e in schedule_raw)
        if any(e <= 0 for e in schedule) or any(
            later >= earlier for later, earlier in zip(schedule[1:], schedule)
        ):
            raise DocumentError("schedule must be positive and strictly decreasing",
                                "$.family.schedule")
        fam_coeffs = None
        if fam_raw.get("coefficients") is not None:
            fc = fam_raw["coefficients"]
            if not isinstance(fc, list) or len(fc) != r:
                raise DocumentError(f"expected {r} coefficient functions",
                                    "$.family.coefficients")
            fam_coeffs = tuple(
                _parse_function(item, f"$.family.coefficients[{d}]", (m, m), eps_ok=True)
                for d, item in enumerate(fc)
            )
        fam_boundary = None
        if fam_raw.get("boundary") is not None:
            fam_boundary = _parse_boundary(fam_raw["boundary"], "$.family.boundary",
                                           m, n + r, eps_ok=True)
            if fam_boundary.conditions != boundary.conditions:
                raise DocumentError("family boundary must keep the same condition count",
                                    "$.family.boundary.conditions")
        fam_rhs = None
        if fam_raw.get("rhs") is not None:
            fam_rhs = _parse_rhs(fam_raw["rhs"], "$.family.rhs", m,
                                 boundary.conditions, eps_ok=True)
        family = FamilyDoc(schedule, fam_coeffs, fam_boundary, fam_rhs)

    return ProblemDocument(interval, r, m, n, exponent, coefficients, boundary, rhs, family)


# ---------------------------------------------------------------------------
# model building


def _build_boundary(doc: BoundaryDoc, eps: float | None) -> BoundaryOperator:
    terms = []
    for point in doc.points:
        location = _resolve_slot(point.location, eps)
        if abs(location.imag) > 0:
            raise DocumentError("boundary point locations must be real")
        matrix = _resolve_slot_array(point.matrix, eps)
        terms.append(PointTerm(location.real, point.order, matrix))
    integral = IntegralTerm(doc.integral.build(eps)) if doc.integral is not None else None
    return BoundaryOperator(doc.conditions, tuple(terms), integral)


def document_problem(doc: ProblemDocument, eps: float | None = None) -> ProblemSpec:
    """Build the problem; with ``eps`` given, family overrides apply."""
    coeffs_docs = doc.coefficients
    boundary_doc = doc.boundary
    rhs_doc = doc.rhs
    if eps is not None and doc.family is not None:
        if doc.family.coefficients is not None:
            coeffs_docs = doc.family.coefficients
        if doc.family.boundary is not None:
            boundary_doc = doc.family.boundary
        if doc.family.rhs is not None:
            rhs_doc = doc.family.rhs
    for d, fd in enumerate(coeffs_docs):
        if fd.kind == "table":
            table_iv = Interval(float(fd.nodes[0]), float(fd.nodes[-1]))
            if table_iv != doc.interval:
                raise DocumentError(
                    "table nodes must span the problem interval", f"$.coefficients[{d}]"
                )
    coefficients = CoefficientSet(
        doc.r, doc.m, doc.n, tuple(fd.build(eps) for fd in coeffs_docs)
    )
    boundary = _build_boundary(boundary_doc, eps)
    rhs = None
    if rhs_doc is not None:
        rhs = RightHandSide(rhs_doc.f.build(eps), _resolve_slot_array(rhs_doc.c, eps))
    problem = ProblemSpec(doc.interval, coefficients, boundary, doc.exponent, rhs)
    for term in problem.boundary.point_terms:
        if not doc.interval.contains(term.point):
            raise DocumentError(
                f"boundary point {term.point} outside the interval "
                f"[{doc.interval.a}, {doc.interval.b}]"
            )
    return problem


def document_family(doc: ProblemDocument) -> ProblemFamily:
    """The eps-indexed family declared by the document's family section."""
    if doc.family is None:
        raise DocumentError("document has no family section")
    return ProblemFamily(
        at_zero=document_problem(doc, eps=0.0),
        generator=lambda eps: document_problem(doc, eps=eps),
        epsilons=doc.family.schedule,
    )


def document_multipoint(doc: ProblemDocument) -> MultipointFamily | None:
    """Extract the multipoint series structure when point terms are tagged.

    Requires every family boundary point term to carry a ``series``
    index.  Each term becomes its own point of its series, with zero
    matrices at the orders it does not mention; limits are the eps = 0
    evaluations.  Returns None when no tagged family boundary exists.
    """
    if doc.family is None or doc.family.boundary is None:
        return None
    points = doc.family.boundary.points
    if not points or any(p.series is None for p in points):
        return None
    q = doc.family.boundary.conditions
    orders = doc.n + doc.r
    by_series: dict[int, list[PointDoc]] = {}
    for p in points:
        by_series.setdefault(p.series, []).append(p)

    def make_series(terms: list[PointDoc], zero_series: bool) -> MultipointSeries:
        def points_fn(eps, terms=terms):
            return np.array([_resolve_slot(t.location, eps).real for t in terms])

        def matrices_fn(eps, terms=terms):
            out = np.zeros((len(terms), orders, q, doc.m), dtype=complex)
            for k, term in enumerate(terms):
                out[k, term.order] = _resolve_slot_array(term.matrix, eps)
            return out

        if zero_series:
            return MultipointSeries(points_fn, matrices_fn)
        limit_points = points_fn(0.0)
        if np.ptp(limit_points) > 1e-12:
            raise DocumentError(
                "all points of a converging series must share the eps=0 limit"
            )
        return MultipointSeries(points_fn, matrices_fn,
                                limit_point=float(limit_points[0]),
                                limit_matrices=matrices_fn(0.0).sum(axis=0))

    series = tuple(
        make_series(terms, zero_series=(index == 0))
        for index, terms in sorted(by_series.items())
    )
    data = None
    if doc.family.rhs is not None:
        c_slots = doc.family.rhs.c
        data = lambda eps: _resolve_slot_array(c_slots, eps)
    elif doc.rhs is not None:
        c_array = _resolve_slot_array(doc.rhs.c, None)
        data = lambda eps: c_array
    return MultipointFamily(series=series, data=data)
