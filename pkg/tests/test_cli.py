import json
from pathlib import Path

import pytest

from fredholm_bvp.cli import emit_json, main

SAMPLES = Path(__file__).resolve().parent.parent / "docs" / "samples"
ONE_POINT = str(SAMPLES / "one-point-first-order.json")
TWO_POINT = str(SAMPLES / "two-point-damped.json")
SPLITTING = str(SAMPLES / "splitting-family.json")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_well_posed_exit_zero(capsys):
    code, out, _ = run(capsys, "analyze", ONE_POINT, "--nodes", "201")
    assert code == 0
    assert "well posed: yes" in out


def test_analyze_machine_output_is_json(capsys):
    code, out, _ = run(capsys, "analyze", ONE_POINT, "--nodes", "201",
                       "--format", "machine")
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "analyze"
    assert doc["report"]["well_posed"] is True
    assert doc["numerical_rank"] == 2


def test_analyze_not_well_posed_exit_two(tmp_path, capsys):
    raw = json.loads(Path(ONE_POINT).read_text())
    raw["boundary"]["conditions"] = 1
    for point in raw["boundary"]["points"]:
        point["matrix"] = [point["matrix"][0]]
    raw["rhs"]["c"] = [raw["rhs"]["c"][0]]
    path = tmp_path / "underdetermined.json"
    path.write_text(json.dumps(raw))
    code, out, _ = run(capsys, "analyze", str(path), "--nodes", "201")
    assert code == 2
    assert "well posed: no" in out
    assert "underdetermined" in out


def test_solve_writes_report(tmp_path, capsys):
    out_path = tmp_path / "solution.json"
    code, _, _ = run(capsys, "solve", TWO_POINT, "--nodes", "201",
                     "--format", "machine", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["command"] == "solve"
    assert doc["residuals"]["equation_max"] < 1e-8
    assert len(doc["nodes"]) == 201
    assert len(doc["samples"]) == 4  # orders 0..n+r


def test_solve_not_well_posed_exit_two(tmp_path, capsys):
    raw = json.loads(Path(ONE_POINT).read_text())
    raw["boundary"]["points"][0]["matrix"] = [[0, 0], [0, 0]]
    raw["boundary"]["points"][1]["matrix"] = [[0, 0], [0, 0]]
    raw["boundary"]["points"][2]["matrix"] = [[0, 0], [0, 0]]
    path = tmp_path / "singular.json"
    path.write_text(json.dumps(raw))
    code, _, err = run(capsys, "solve", str(path), "--nodes", "201")
    assert code == 2
    assert "not well posed" in err


def test_family_command(capsys):
    code, out, _ = run(capsys, "family", SPLITTING, "--nodes", "201")
    assert code == 0
    assert "condition (0): pass" in out
    assert "multipoint assumptions" in out
    assert "pass" in out


def test_family_machine_output(capsys):
    code, out, _ = run(capsys, "family", SPLITTING, "--nodes", "201",
                       "--format", "machine")
    assert code == 0
    doc = json.loads(out)
    assert doc["condition_0"] is True
    assert doc["multipoint_assumptions"]["passed"] is True
    assert doc["solution_convergence"] is True


def test_family_eps_schedule_flag(capsys):
    code, out, _ = run(capsys, "family", SPLITTING, "--nodes", "201",
                       "--eps-schedule", "1e-2,1e-3", "--format", "machine")
    assert code == 0
    doc = json.loads(out)
    assert doc["epsilons"] == [1e-2, 1e-3]


def test_family_requires_family_section(capsys):
    code, _, err = run(capsys, "family", ONE_POINT)
    assert code == 1
    assert "family" in err


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex3", "ex4", "ex5"])
def test_oracle_check_builtins(name, capsys):
    code, out, _ = run(capsys, "oracle-check", name, "--nodes", "501",
                       "--format", "machine")
    assert code == 0
    doc = json.loads(out)
    assert doc["relative_deviation"] <= 1e-6


def test_oracle_check_on_document(capsys):
    code, out, _ = run(capsys, "oracle-check", ONE_POINT, "--nodes", "501",
                       "--format", "machine")
    assert code == 0
    doc = json.loads(out)
    assert doc["example"] == "one-point-first-order"
    assert doc["relative_deviation"] <= 1e-6


def test_solve_without_rhs_exit_one(tmp_path, capsys):
    raw = json.loads(Path(ONE_POINT).read_text())
    del raw["rhs"]
    path = tmp_path / "no-rhs.json"
    path.write_text(json.dumps(raw))
    code, _, err = run(capsys, "solve", str(path), "--nodes", "201")
    assert code == 1
    assert "right-hand side" in err


def test_missing_file_exit_one(capsys):
    code, _, err = run(capsys, "analyze", "no-such-file.json")
    assert code == 1
    assert "error" in err


def test_usage_error_exit_one(capsys):
    code, _, err = run(capsys, "analyze")
    assert code == 1


def test_unknown_command_exit_one(capsys):
    code, _, err = run(capsys, "frobnicate", ONE_POINT)
    assert code == 1


def test_machine_reports_are_byte_identical(capsys):
    _, first, _ = run(capsys, "analyze", ONE_POINT, "--nodes", "201",
                      "--format", "machine")
    _, second, _ = run(capsys, "analyze", ONE_POINT, "--nodes", "201",
                       "--format", "machine")
    assert first == second
    _, third, _ = run(capsys, "family", SPLITTING, "--nodes", "201",
                      "--format", "machine")
    _, fourth, _ = run(capsys, "family", SPLITTING, "--nodes", "201",
                       "--format", "machine")
    assert third == fourth


def test_emit_json_float_formatting():
    text = emit_json({"x": 0.1, "y": [1.0, float("inf")], "flag": True, "none": None})
    assert "0.10000000000000001" in text
    assert '"inf"' in text
    assert "true" in text
    assert "null" in text
    parsed = json.loads(text)
    assert parsed["x"] == 0.1


def test_emit_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        emit_json({"x": object()})
