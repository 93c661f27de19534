import json
from pathlib import Path

import numpy as np
import pytest

from fredholm_bvp.document import (
    DocumentError,
    document_family,
    document_multipoint,
    document_problem,
    load_document,
)

SAMPLES = Path(__file__).resolve().parent.parent / "docs" / "samples"


def minimal_document(**overrides):
    doc = {
        "interval": {"a": 0.0, "b": 1.0},
        "orders": {"r": 1, "m": 2, "n": 1},
        "exponent": 2,
        "coefficients": [
            {"kind": "constant", "values": [[0, 0], [0, 0]]}
        ],
        "boundary": {
            "conditions": 2,
            "points": [
                {"t": 0.0, "order": 0, "matrix": [[1, 0], [0, 1]]}
            ],
        },
        "rhs": {
            "f": {"kind": "constant", "values": [1, 0]},
            "c": [[1, 0], [0, 0]],
        },
    }
    doc.update(overrides)
    return doc


def test_load_minimal_document():
    doc = load_document(minimal_document())
    problem = document_problem(doc)
    assert (problem.r, problem.m, problem.n, problem.q) == (1, 2, 1, 2)
    assert problem.rhs is not None
    np.testing.assert_array_equal(problem.rhs.c, [1.0, 0.0])


def test_sample_files_load_and_build():
    for name in ("one-point-first-order.json", "two-point-damped.json",
                 "splitting-family.json"):
        doc = load_document(SAMPLES / name)
        problem = document_problem(doc)
        assert problem.q == problem.state_size


def test_round_trip_is_semantically_idempotent():
    for name in ("one-point-first-order.json", "two-point-damped.json",
                 "splitting-family.json"):
        first = load_document(SAMPLES / name)
        emitted = first.to_json_dict()
        second = load_document(json.loads(json.dumps(emitted)))
        assert second.to_json_dict() == emitted


def test_exponent_inf():
    doc = load_document(minimal_document(exponent="inf"))
    assert document_problem(doc).exponent.is_infinite


def test_expression_coefficients():
    raw = minimal_document(coefficients=[
        {"kind": "expression",
         "entries": [["t^2", "sin(t)"], ["0", "exp(-t)"]]}
    ])
    problem = document_problem(load_document(raw))
    values = problem.coefficients.by_order[0].eval(np.array([0.5]))
    np.testing.assert_allclose(values[0], [[0.25, np.sin(0.5)], [0.0, np.exp(-0.5)]],
                               atol=1e-14)


def test_polynomial_alias():
    raw = minimal_document(coefficients=[
        {"kind": "polynomial", "entries": [["t", "0"], ["0", "t"]]}
    ])
    problem = document_problem(load_document(raw))
    values = problem.coefficients.by_order[0].eval(np.array([0.3]))
    np.testing.assert_allclose(values[0], 0.3 * np.eye(2), atol=1e-15)


def test_missing_field_path():
    raw = minimal_document()
    del raw["orders"]
    with pytest.raises(DocumentError, match="orders"):
        load_document(raw)


def test_wrong_coefficient_count():
    raw = minimal_document()
    raw["orders"]["r"] = 2
    with pytest.raises(DocumentError, match="coefficient"):
        load_document(raw)


def test_bad_kind():
    raw = minimal_document(coefficients=[{"kind": "spline", "values": []}])
    with pytest.raises(DocumentError, match="kind"):
        load_document(raw)


def test_eps_outside_family_rejected():
    raw = minimal_document()
    raw["boundary"]["points"][0]["t"] = "eps"
    with pytest.raises(DocumentError, match="family"):
        load_document(raw)


def test_fractional_order_rejected():
    raw = minimal_document()
    raw["boundary"]["points"][0]["order"] = 0.5
    with pytest.raises(DocumentError, match="fractional"):
        load_document(raw)


def test_out_of_range_order_rejected():
    raw = minimal_document()
    raw["boundary"]["points"][0]["order"] = 2  # top order is n + r = 2
    with pytest.raises(DocumentError, match="range"):
        load_document(raw)


def test_bad_expression_reports_path():
    raw = minimal_document(coefficients=[
        {"kind": "expression", "entries": [["t +", "0"], ["0", "0"]]}
    ])
    with pytest.raises(DocumentError, match=r"coefficients\[0\]"):
        load_document(raw)


def test_complex_pairs():
    raw = minimal_document()
    raw["rhs"]["c"] = [[1.0, 2.0], [0.0, -1.0]]
    problem = document_problem(load_document(raw))
    np.testing.assert_array_equal(problem.rhs.c, [1.0 + 2.0j, -1.0j])


def test_bad_complex_pair():
    raw = minimal_document()
    raw["rhs"]["c"] = [[1.0, 2.0, 3.0], [0.0, 0.0]]
    with pytest.raises(DocumentError, match=r"\[re, im\]"):
        load_document(raw)


def test_family_building():
    doc = load_document(SAMPLES / "splitting-family.json")
    family = document_family(doc)
    zero = family.at(0.0)
    member = family.at(0.01)
    assert len(zero.boundary.point_terms) == 6
    assert len(member.boundary.point_terms) == 6
    points_zero = sorted({t.point for t in zero.boundary.point_terms})
    assert points_zero == [0.25, 0.75]
    points_member = sorted({t.point for t in member.boundary.point_terms})
    assert points_member == [0.24, 0.26, 0.74, 0.76]


def test_multipoint_extraction():
    doc = load_document(SAMPLES / "splitting-family.json")
    multipoint = document_multipoint(doc)
    assert multipoint is not None
    assert len(multipoint.series) == 2
    for series in multipoint.series:
        assert not series.is_zero_series
    boundary = multipoint.boundary_at(0.01)
    assert boundary.codomain == 2
    np.testing.assert_array_equal(multipoint.data(0.3), [1.0, 1.0])


def test_multipoint_requires_tags():
    doc = load_document(minimal_document(family={"schedule": [0.1, 0.01]}))
    assert document_multipoint(doc) is None


def test_divergent_generator_rejected_at_limit():
    raw = minimal_document(family={
        "schedule": [0.1, 0.01],
        "rhs": {
            "f": {"kind": "constant", "values": [1, 0]},
            "c": ["1 / eps", [0, 0]],
        },
    })
    doc = load_document(raw)
    with pytest.raises(DocumentError, match="finite"):
        document_problem(doc, eps=0.0)


def test_table_coefficient_must_span_interval():
    raw = minimal_document(coefficients=[
        {"kind": "table", "nodes": [0.0, 0.25, 0.5],
         "samples": [[[[0, 0], [0, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 0]]]]}
    ])
    doc = load_document(raw)
    with pytest.raises(DocumentError, match="span"):
        document_problem(doc)
