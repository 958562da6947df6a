"""Command-line front-end: dispatch, exit codes, and report determinism."""

import json
import subprocess
import sys

import pytest

from riccstab.cli import main

FEASIBLE = {"A": [[-2.0]], "B": [[1.0]]}
REFUTED = {"A": [[-1.0]], "B": [[2.0]]}
CHAIN = {
    "A": [[-1.0, 0.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 1.5, -1.0]],
    "B": [[0.0, 0.0, 0.1], [0.0, 0.0, -0.1], [0.0, 0.0, 0.0]],
}


def write(tmp_path, payload, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run_main(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_feasible(tmp_path, capsys):
    code, out, _ = run_main(capsys, ["check", write(tmp_path, FEASIBLE)])
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "Feasible"
    assert report["margin"] > 0.0


def test_check_refuted_with_witness(tmp_path, capsys):
    code, out, _ = run_main(capsys, ["check", write(tmp_path, REFUTED)])
    assert code == 0
    report = json.loads(out)
    assert report["status"] == "Refuted"
    assert report["witness_S"] == [[1.0, 1.0], [1.0, 1.0]]


def test_classify_structured(tmp_path, capsys):
    code, out, _ = run_main(capsys, ["classify", write(tmp_path, CHAIN)])
    assert code == 0
    report = json.loads(out)
    assert report["tag"]["name"] == "Chain3x3"
    assert set(report["condition_values"]) == {"diagonal_margin", "tail_margin", "determinant_margin"}
    assert report["stable"] == "Stable"


def test_classify_unstructured_falls_back_to_check(tmp_path, capsys):
    dense = {
        "A": [[-3.0, 0.4, -0.2], [0.3, -2.5, 0.1], [-0.1, 0.2, -2.0]],
        "B": [[0.1, -0.1, 0.0], [0.0, 0.1, 0.1], [0.1, 0.0, -0.1]],
    }
    code, out, _ = run_main(capsys, ["classify", write(tmp_path, dense)])
    report = json.loads(out)
    assert report["tag"]["name"] == "Unstructured"
    assert report["verdict"]["status"] == "Feasible"
    assert code == 0


def test_refute_emits_witness_or_empty(tmp_path, capsys):
    code, out, _ = run_main(capsys, ["refute", write(tmp_path, REFUTED)])
    assert code == 0
    assert json.loads(out)["failing_minor"] == -1.0

    code, out, _ = run_main(capsys, ["refute", write(tmp_path, FEASIBLE), "--samples", "16"])
    assert code == 2
    assert json.loads(out)["witness"] is None


def test_transform_maps_certificate(tmp_path, capsys):
    problem = dict(FEASIBLE, transform={"d": [2.0], "e": [1.0]})
    code, out, _ = run_main(capsys, ["transform", write(tmp_path, problem)])
    assert code == 0
    report = json.loads(out)
    assert report["A"] == [[-8.0]]
    assert report["B"] == [[2.0]]
    assert report["certificate"]["Q"] == pytest.approx([4.0], abs=2e-3)


def test_simulate_reports_and_csv(tmp_path, capsys):
    problem = dict(FEASIBLE, tau=[0.0, 1.0])
    out_path = tmp_path / "traj.csv"
    code, out, _ = run_main(
        capsys,
        ["simulate", write(tmp_path, problem), "--horizon", "40", "--step", "0.02", "--out", str(out_path)],
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["certificate_status"] == "Feasible"
    assert [r["tau"] for r in payload["reports"]] == [0.0, 1.0]
    assert all(r["decayed"] for r in payload["reports"])
    for tau_name in ("traj_tau0.csv", "traj_tau1.csv"):
        text = (tmp_path / tau_name).read_text()
        assert text.startswith("t,x_1,V\n")


def test_simulate_csv_stdout_single_tau(tmp_path, capsys):
    code, out, _ = run_main(
        capsys,
        ["simulate", write(tmp_path, FEASIBLE), "--tau", "0.5", "--horizon", "40", "--step", "0.1", "--format", "csv"],
    )
    assert code == 0
    assert out.startswith("t,x_1,V\n")


def test_input_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_main(capsys, ["check", str(bad)])
    assert code == 1
    assert "error" in err

    mismatched = write(tmp_path, {"A": [[-1.0]], "B": [[1.0, 0.0], [0.0, 1.0]]}, "dims.json")
    code, _, err = run_main(capsys, ["check", mismatched])
    assert code == 1

    code, _, err = run_main(capsys, ["simulate", write(tmp_path, FEASIBLE), "--tau", "0,1", "--format", "csv"])
    assert code == 1
    assert "exactly one delay" in err


def test_unknown_flag_exits_one(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["check", write(tmp_path, FEASIBLE), "--bogus"])
    assert exc.value.code == 1


def test_csv_format_rejected_outside_simulate(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["check", write(tmp_path, FEASIBLE), "--format", "csv"])
    assert exc.value.code == 1


def test_reports_byte_identical_across_processes(tmp_path):
    path = write(tmp_path, CHAIN)
    cmd = [sys.executable, "-m", "riccstab.cli", "check", path, "--seed", "3"]
    first = subprocess.run(cmd, capture_output=True, text=True)
    second = subprocess.run(cmd, capture_output=True, text=True)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    assert first.stdout.strip() != ""
