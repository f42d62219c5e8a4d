import json
import math
from pathlib import Path

import numpy as np
import pytest

from dimfree.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_project_vector(capsys):
    code, out, _ = run(capsys, "project", "--vec", "[1,0,-1,0,1,2,-2]", "--to", 3)
    assert code == 0 and out == "0.2857 0.0000 0.1429\n"


def test_project_matrix_csv(capsys):
    code, out, _ = run(capsys, "project", "--from", 3, "--to", 2, "--csv")
    rows = [[float(v) for v in line.split(",")] for line in out.splitlines()]
    np.testing.assert_allclose(rows, [[2 / 3, 1 / 3, 0], [0, 1 / 3, 2 / 3]])


def test_project_schedule(capsys):
    code, out, _ = run(capsys, "project", "--system",
                       CONFIGS / "parity_schedule_printed_projectors.json", "--to", 3)
    assert code == 0
    assert out.count("stage=") == 2 and "A=" in out and "C=" in out


def test_vector_commands(capsys):
    assert run(capsys, "reduce", "--vec", "[1,1,2,2]")[1] == "dim=2\nrep=1 2\n"
    assert run(capsys, "lift", "--vec", "[1,2]", "--k", 2)[1] == "1 1 2 2\n"
    _, out, _ = run(capsys, "distance", "--a", "[1,2]", "--b", "[2,1]")
    assert report(out)["distance"] == "1"


def test_simulate_decay_csv(capsys):
    code, out, _ = run(capsys, "simulate", CONFIGS / "decay.json")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,dim,x1"
    t, dim, x = lines[-1].split(",")
    assert float(t) == 1.0 and dim == "1"
    assert abs(float(x) - math.exp(-1)) <= 1e-6


def test_simulate_overrides_and_out_file(capsys, tmp_path):
    target = tmp_path / "run.csv"
    code, out, _ = run(capsys, "simulate", CONFIGS / "decay.json", "--t1", 0.5, "--dt", 0.01,
                       "--x0", "[2]", "--out", target)
    assert code == 0
    rep = report(out)
    assert rep["samples"] == "51" and rep["final_t"] == "0.5"
    assert float(rep["final_state"]) == pytest.approx(2 * math.exp(-0.5), rel=1e-5)
    assert target.read_text().startswith("t,dim,x1\n")


def test_dock_dimension_column_changes(capsys):
    code, out, _ = run(capsys, "dock", CONFIGS / "dock_two_carts.json")
    assert code == 0
    dims = [line.split(",")[1] for line in out.splitlines()[1:]]
    assert dims[0] == "2" and dims[-1] == "6"


def test_undock_via_dock_command(capsys):
    code, out, _ = run(capsys, "dock", CONFIGS / "undock_two_carts.json")
    dims = [line.split(",")[1] for line in out.splitlines()[1:]]
    assert code == 0 and dims[0] == "3" and dims[-1] == "6"


def test_switch_reaches_steering_target(capsys):
    code, out, _ = run(capsys, "switch", CONFIGS / "steer_then_switch.json")
    assert code == 0
    rows = {float(line.split(",")[0]): line.split(",") for line in out.splitlines()[1:]}
    before = [float(v) for v in rows[1.0][2:] if v]
    np.testing.assert_allclose(before, [1, 1], atol=1e-6)


def test_analyze_reports(capsys):
    code, out, _ = run(capsys, "analyze", CONFIGS / "mixed_generators.json")
    rep = report(out)
    assert code == 0
    assert (rep["ctrb_rank"], rep["controllable"]) == ("4", "yes")
    assert (rep["obsv_rank"], rep["observable"]) == ("2", "no")
    assert report(run(capsys, "analyze", CONFIGS / "zero_input.json")[1])["ctrb_rank"] == "0"


def test_check_tensor_reports(capsys):
    rep = report(run(capsys, "check-tensor", CONFIGS / "standard_symplectic.json")[1])
    assert rep["symplectic"] == "yes" and rep["closed"] == "yes"
    assert float(rep["value_preservation_error"]) <= 1e-12
    assert report(run(capsys, "check-tensor", CONFIGS / "sphere_metric.json")[1])[
        "riemannian"] == "yes"
    assert report(run(capsys, "check-tensor", CONFIGS / "twisted_form.json")[1])[
        "closed"] == "no"


def test_jobs_keep_input_order(capsys):
    paths = [CONFIGS / n for n in ("sphere_metric.json", "standard_symplectic.json",
                                   "twisted_form.json", "skew_tensor.json")]
    serial = run(capsys, "check-tensor", *paths)
    parallel = run(capsys, "check-tensor", "--jobs", 4, *paths)
    assert serial == parallel
    assert [line for line in serial[1].splitlines() if line.startswith("==")] == [
        f"== {p}" for p in paths]


def test_csv_is_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "dock", CONFIGS / "dock_two_carts.json", "--out", path)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def _write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_config_errors_exit_two(capsys, tmp_path):
    cases = [
        ("simulate", _write(tmp_path, {"system": {"f": ["-x1"]}, "x0": [1], "colour": 1})),
        ("simulate", _write(tmp_path, {"system": {"f": ["-x1 +"]}, "x0": [1]}, "syntax.json")),
        ("simulate", tmp_path / "missing.json"),
        ("analyze", _write(tmp_path, {"linear_system": {"A": [[1, 2]]}}, "nonsquare.json")),
    ]
    for cmd, path in cases:
        code, out, err = run(capsys, cmd, path)
        assert code == 2, (path, err)
        assert err.startswith("error:") and err.count("\n") == 1
    code, _, err = run(capsys, "project", "--to", 3)
    assert code == 2 and err.startswith("error:") and err.count("\n") == 1
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and err.count("\n") == 1


def test_divergence_exits_three(capsys, tmp_path):
    path = _write(tmp_path, {"system": {"f": ["x1^2"]}, "x0": [1], "t1": 2, "dt": 0.01})
    code, out, err = run(capsys, "simulate", path)
    assert code == 3
    assert err.startswith("error: numerical divergence") and "last good t=" in err
    assert err.count("\n") == 1


def test_uncontrollable_steering_exits_three(capsys, tmp_path):
    cfg = json.loads((CONFIGS / "steer_then_switch.json").read_text())
    cfg["sys1"]["B"] = [[0], [0]]
    code, _, err = run(capsys, "switch", _write(tmp_path, cfg))
    assert code == 3 and err.startswith("error:")


def test_tolerance_from_environment(capsys, monkeypatch):
    vec = "[1,1.001]"
    assert report(run(capsys, "reduce", "--vec", vec)[1])["dim"] == "2"
    monkeypatch.setenv("DIMFREE_TOL", "0.01")
    assert report(run(capsys, "reduce", "--vec", vec)[1])["dim"] == "1"
    monkeypatch.setenv("DIMFREE_TOL", "-1")
    assert run(capsys, "reduce", "--vec", vec)[0] == 2
