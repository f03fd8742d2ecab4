import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpolar import acceptance, cli
from qpolar.acceptance import CriterionResult, command_for, problem_files

PROBLEMS = problem_files()


def load(name):
    return json.loads(next(p for p in PROBLEMS if p.name == name).read_text())


def write(tmp_path, doc, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.mark.parametrize("path", PROBLEMS, ids=lambda p: p.name)
def test_example_problems_succeed_deterministically(path):
    command = command_for(path.name)
    doc = json.loads(path.read_text())
    first, code = cli.run(command, doc)
    assert code == 0, first.get("error")
    assert first["status"] == "ok"
    second, _ = cli.run(command, json.loads(path.read_text()))
    assert cli.dumps(first) == cli.dumps(second)


@pytest.mark.parametrize(
    "name, command",
    [
        ("dual_ball_n2.json", "dual"),
        ("pair_check_saturated.json", "pair-check"),
        ("donoho_stark_ball.json", "donoho-stark"),
        ("capacity_product.json", "capacity"),
    ],
)
def test_command_for_uses_longest_prefix(name, command):
    assert command_for(name) == command


def test_command_for_rejects_unknown_prefix():
    with pytest.raises(ValueError):
        command_for("teleport_state.json")


def test_report_layout_and_pauli_values():
    report, code = cli.run("reconstruct", load("reconstruct_pauli.json"))
    assert code == 0
    assert list(report) == ["command", "report_version", "inputs", "tolerance", "seed",
                            "status", "results", "certificates", "flags"]
    text = cli.dumps(report)
    assert "0.8660254037844386" in text


def test_unknown_field_is_schema_error(tmp_path, capsys):
    doc = load("reconstruct_pauli.json")
    doc["colour"] = "blue"
    code = cli.main(["reconstruct", "-i", write(tmp_path, doc)])
    out = json.loads(capsys.readouterr().out)
    assert code == 1
    assert out["error"]["type"] == "SchemaError"
    assert "colour" in out["error"]["message"]


def test_wrong_type_reports_the_field_not_unevaluated_noise():
    doc = load("reconstruct_pauli.json")
    doc["sigma_xx"] = "one"
    report, code = cli.run("reconstruct", doc)
    assert code == 1
    assert "sigma_xx" in report["error"]["message"]
    assert "Unevaluated" not in report["error"]["message"]


def test_precondition_failure_exits_2():
    doc = load("reconstruct_pauli.json")
    doc["sigma_xx"] = 0.1
    report, code = cli.run("reconstruct", doc)
    assert code == 2
    assert report["error"]["type"] == "SubHeisenberg"
    assert report["status"] == "error"


def test_selftest_failure_exits_3(monkeypatch, capsys):
    fake = [CriterionResult(1, "stub", True, "ok"), CriterionResult(2, "stub", False, "no")]
    monkeypatch.setattr(acceptance, "run_all", lambda seed=0: fake)
    report, code = cli.run("selftest", {"version": "1"})
    assert code == 3
    assert report["status"] == "failed"
    assert "criterion  2: FAIL" in capsys.readouterr().err


def test_unreadable_input_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["hardy", "-i", str(bad)]) == 1
    assert "cannot read problem" in capsys.readouterr().err


@pytest.mark.parametrize("flag", [["--seed", "-1"], ["--tolerance-rel", "0"]])
def test_invalid_overrides_exit_1(tmp_path, flag):
    path = write(tmp_path, load("hardy_unique.json"))
    assert cli.main(["hardy", "-i", path, *flag]) == 1


def test_seed_and_tolerance_overrides(tmp_path, capsys):
    path = write(tmp_path, load("mahler_cube.json"))
    assert cli.main(["mahler", "-i", path, "--seed", "12", "--tolerance-rel", "1e-7"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["seed"] == 12
    assert report["tolerance"]["rel_eq"] == 1e-7


def test_output_file_matches_stdout(tmp_path, capsys):
    path = write(tmp_path, load("capacity_ellipsoid.json"))
    out = tmp_path / "report.json"
    assert cli.main(["capacity", "-i", path]) == 0
    stdout = capsys.readouterr().out
    assert cli.main(["capacity", "-i", path, "-o", str(out)]) == 0
    assert out.read_text() == stdout


def test_evolve_csv(tmp_path, capsys):
    path = write(tmp_path, load("evolve_free_particle.json"))
    assert cli.main(["evolve", "-i", path, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t"
    assert len(lines) == 1 + 5
    row = dict(zip(header, lines[-1].split(",")))
    assert float(row["t"]) == 5.0
    assert float(row["vol_x"]) == pytest.approx(2 * np.sqrt(26), rel=1e-12)


def test_csv_only_for_evolve(tmp_path):
    path = write(tmp_path, load("hardy_unique.json"))
    assert cli.main(["hardy", "-i", path, "--format", "csv"]) == 1


@pytest.mark.parametrize(
    "value, text",
    [(1.0, "1.0"), (-3.0, "-3.0"), (0.1, "0.10000000000000001"), (float("nan"), "null"),
     (float("inf"), "null"), (1e300, "1.0000000000000001e+300")],
)
def test_float_formatting(value, text):
    assert cli.dumps(value) == text + "\n"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert json.loads(cli.dumps({"x": x}))["x"] == x


def test_dumps_keeps_insertion_order():
    text = cli.dumps({"b": 1, "a": [1.5, 2], "c": {"z": True, "y": None}})
    assert json.loads(text) == {"b": 1, "a": [1.5, 2], "c": {"z": True, "y": None}}
    assert text.index('"b"') < text.index('"a"') < text.index('"c"')


def test_module_entry_point(tmp_path):
    path = write(tmp_path, load("hardy_unique.json"))
    proc = subprocess.run([sys.executable, "-m", "qpolar", "hardy", "-i", path],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "ok"
