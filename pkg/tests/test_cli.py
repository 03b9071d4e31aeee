import json
import os

import numpy as np
import pytest

from robustctl import cli, files
from robustctl.gates import CNOT, load_gate, resolve_gate

QUICK = ["--total-time", "4", "--segments", "8", "--restarts", "2", "--max-iter", "40",
         "--threads", "1", "--n-points", "3"]


@pytest.fixture
def reflection_file(tmp_path):
    path = tmp_path / "wx_z.json"
    path.write_text(json.dumps({"dim": 2, "params": [{"name": "omega", "min": -1, "max": 1}],
                                "drift": [{"pauli": "X", "param": "omega"}],
                                "controls": [[{"pauli": "Z", "coeff": 1}]]}))
    return str(path)


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_analyze_system_e(tmp_path):
    assert run("analyze", "--system", "E", "--n-points", 11, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "analysis.json").read_text())
    assert doc["extended_lie_dim"] == 165 and doc["condition1"] and doc["condition2"]


def test_analyze_reflection_pair_negative(tmp_path, reflection_file):
    assert run("analyze", "--system", reflection_file, "--n-points", 2, "--out", tmp_path) == 2
    doc = json.loads((tmp_path / "analysis.json").read_text())
    assert doc["condition2"] is False and doc["extended_lie_dim"] == 3


def test_malformed_inputs_exit_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("analyze", "--system", bad, "--out", tmp_path) == 1
    assert run("analyze", "--config", bad, "--out", tmp_path) == 1
    unknown = tmp_path / "cfg.json"
    unknown.write_text(json.dumps({"sytem": "A"}))
    assert run("analyze", "--config", unknown, "--out", tmp_path) == 1
    assert run("analyze", "--system", "Q", "--out", tmp_path) == 1


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": "A", "n_points": 2, "restarts": 7, "seed": 3}))
    args = cli.build_parser().parse_args(["optimize", "--config", str(cfg), "--seed", "9"])
    rc = cli.resolve_config(args)
    assert (rc.system, rc.n_points, rc.restarts, rc.seed) == ("A", 2, 7, 9)


def test_threads_env_cap(monkeypatch):
    monkeypatch.setenv("ROBUSTCTL_THREADS", "1")
    assert cli.RunConfig(threads=8).optimizer().workers == 1


def test_optimize_without_iterations_is_negative(tmp_path):
    code = run("optimize", "--system", "A", "--restarts", 0, "--max-iter", 0, "--out", tmp_path,
               "--no-plots")
    assert code == 2
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["converged"] is False
    assert "wall_time_s" in json.loads((tmp_path / "timing.json").read_text())


def test_optimize_then_sweep_round_trip(tmp_path):
    run("optimize", "--system", "A", *QUICK, "--out", tmp_path)
    assert (tmp_path / "pulse.png").stat().st_size > 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert run("sweep", "--system", "A", "--n-points", 3, "--sweep-points", 1001,
               "--out", tmp_path) == 0
    header, rows = files.read_csv(tmp_path / "spectrum.csv")
    assert header == ["omega", "error_literal", "error_phase_insensitive", "is_grid_point"]
    assert len(rows) == 1001
    grid_rows = [r for r in rows if r[3] == "true"]
    assert [float(r[2]) for r in grid_rows] == rep["per_point_error"]
    assert [float(r[1]) for r in grid_rows] == rep["per_point_error_literal"]
    assert (tmp_path / "spectrum.png").stat().st_size > 0
    raw = (tmp_path / "spectrum.csv").read_bytes()
    assert b"\r\n" not in raw


def test_sweep_rejects_bad_pulse_file(tmp_path):
    bad = tmp_path / "pulse.csv"
    bad.write_text("segment_index,t_start,t_end,amp_0,amp_1\n0,0.0,1.0,0.5,0.1\n")
    assert run("sweep", "--system", "A", "--pulse", bad, "--out", tmp_path) == 1
    bad.write_text("segment_index,t_start,t_end,amp_0\n0,0.0,1.0,0.5\n1,1.0,3.0,0.5\n")
    assert run("sweep", "--system", "A", "--pulse", bad, "--out", tmp_path) == 1


def test_pulse_csv_round_trip(tmp_path):
    from robustctl.grape import PulseSchedule
    rng = np.random.default_rng(0)
    s = PulseSchedule(32.0, rng.uniform(-1, 1, (2, 128)))
    files.write_pulse_csv(tmp_path / "p.csv", s)
    back = files.read_pulse_csv(tmp_path / "p.csv", n_controls=2)
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
    assert back.total_time == s.total_time
    with pytest.raises(files.SchemaError):
        files.read_pulse_csv(tmp_path / "p.csv", n_controls=1)


def test_optimize_same_seed_same_bytes(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    run("optimize", "--system", "A", *QUICK, "--seed", 5, "--out", a, "--no-plots")
    monkeypatch.setenv("ROBUSTCTL_THREADS", "2")
    run("optimize", "--system", "A", *QUICK[:-4], "--threads", 2, "--n-points", 3, "--seed", 5,
        "--out", b, "--no-plots")
    assert (a / "pulse.csv").read_bytes() == (b / "pulse.csv").read_bytes()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_mintime_rows_and_rerun(tmp_path):
    argv = ["mintime", "--system", "A", "--n-values", "1,3", "--epsilons", "1e-2", "--t-max", 40,
            "--segments", 64, "--restarts", 3, "--max-iter", 300, "--threads", 1, "--out", tmp_path]
    assert run(*argv) == 0
    header, rows = files.read_csv(tmp_path / "mintime.csv")
    assert header[:4] == ["N", "epsilon", "T", "converged"]
    assert len(rows) == 2 and all(r[3] == "true" for r in rows)
    first = (tmp_path / "mintime.csv").read_bytes()
    assert run(*argv) == 0
    assert (tmp_path / "mintime.csv").read_bytes() == first
    assert (tmp_path / "mintime.png").stat().st_size > 0


def test_mintime_empty_n_list(tmp_path):
    assert run("mintime", "--system", "A", "--n-values", "", "--out", tmp_path) == 1


def test_polyfit_and_recurrence(tmp_path):
    assert run("polyfit", "--k-max", 6, "--out", tmp_path) == 0
    header, rows = files.read_csv(tmp_path / "polyfit.csv")
    assert header == ["K", "sup_error"] and len(rows) == 7
    assert abs(float(rows[0][1]) - 1 / 3) < 1e-9
    assert (tmp_path / "polyfit.png").stat().st_size > 0
    assert run("recurrence", "--system", "1q-wX", "--params", "1", "--eps", 1e-8,
               "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "recurrence.json").read_text())
    assert abs(doc["time"] - 2 * np.pi) < 1e-6
    assert run("recurrence", "--system", "1q-wX", "--params", "1", "--horizon", 3,
               "--out", tmp_path) == 2


def test_gate_files(tmp_path):
    np.save(tmp_path / "g.npy", CNOT)
    np.testing.assert_array_equal(resolve_gate(str(tmp_path / "g.npy")), CNOT)
    (tmp_path / "g.json").write_text(json.dumps({"re": np.eye(4).tolist()}))
    np.testing.assert_array_equal(load_gate(tmp_path / "g.json"), np.eye(4))
    (tmp_path / "bad.json").write_text(json.dumps({"re": (2 * np.eye(4)).tolist()}))
    with pytest.raises(ValueError):
        load_gate(tmp_path / "bad.json")
    np.testing.assert_array_equal(resolve_gate("identity"), np.eye(4))
