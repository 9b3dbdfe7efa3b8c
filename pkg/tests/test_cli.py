import json

import numpy as np
import pytest

from ehsched.cli import main


@pytest.fixture()
def tiny_scenario(tmp_path):
    data = {
        "name": "tiny",
        "bandwidth_hz": 1000.0,
        "noise_density": 1e-6,
        "path_loss_db": [25.0, 31.0],
        "slot_lengths": [1.0, 1.0, 1.0],
        "harvests": [2.0, 1.0, 3.0],
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(data, indent=2))
    return path


def read_csv(path):
    rows = [line.split(",") for line in path.read_text().strip().splitlines()]
    return rows


def test_run_writes_artifacts(tiny_scenario, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["run", str(tiny_scenario), "--out", str(out)])
    assert rc == 0
    assert "utility" in capsys.readouterr().out

    sched_rows = read_csv(out / "schedule.csv")
    assert sched_rows[0][0] == "p"
    assert sched_rows[1][0] == "tau_1"
    assert sched_rows[2][0] == "tau_2"
    assert len(sched_rows) == 3
    assert len(sched_rows[0]) == 4  # label + K values

    trace_rows = read_csv(out / "trace.csv")
    assert trace_rows[0] == ["iter", "utility"]
    utilities = [float(r[1]) for r in trace_rows[1:]]
    assert all(b >= a - 1e-9 for a, b in zip(utilities, utilities[1:]))

    metric_rows = read_csv(out / "metrics.csv")
    assert metric_rows[0] == ["metric", "value"]
    metrics = {r[0]: r[1] for r in metric_rows[1:]}
    assert {"utility", "utility_improvement_pct", "jain", "bits_user_1",
            "bits_user_2"} <= set(metrics)


def test_run_builtin_reproduces_utility(tmp_path):
    out = tmp_path / "out"
    rc = main(["run", "table1-s1tilde", "--out", str(out)])
    assert rc == 0
    metrics = {r[0]: r[1] for r in read_csv(out / "metrics.csv")[1:]}
    assert float(metrics["utility"]) == pytest.approx(75.7325, abs=0.01)


def test_single_user_single_slot(tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({
        "path_loss_db": [25.0],
        "slot_lengths": [2.0],
        "harvests": [4.0],
    }))
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    rows = read_csv(out / "schedule.csv")
    assert float(rows[0][1]) == pytest.approx(2.0)  # p = E/T
    assert float(rows[1][1]) == pytest.approx(2.0)  # tau = T


def test_concentrated_harvest_scenario(tmp_path):
    path = tmp_path / "burst.json"
    path.write_text(json.dumps({
        "path_loss_db": [25.0, 31.0],
        "slot_lengths": [1.0] * 5,
        "harvests": [40.0, 0.0, 0.0, 0.0, 0.0],
    }))
    out = tmp_path / "out"
    assert main(["run", str(path), "--out", str(out)]) == 0
    rows = read_csv(out / "schedule.csv")
    powers = np.array([float(v) for v in rows[0][1:]])
    assert np.all(powers > 0)
    assert np.all(np.cumsum(powers) <= 40.0 + 1e-6)
    utilities = [float(r[1]) for r in read_csv(out / "trace.csv")[1:]]
    finite = [u for u in utilities if np.isfinite(u)]
    assert all(b >= a - 1e-9 for a, b in zip(finite, finite[1:]))


def test_schema_violation_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "path_loss_db": [25.0],\n  "slot_lengths": [1.0],\n  "harvests": [-2.0]\n}\n')
    rc = main(["run", str(path), "--out", str(tmp_path)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "line 4" in err and "harvests" in err


def test_json_syntax_error_exits_1(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "path_loss_db": [25.0],,\n}\n')
    rc = main(["run", str(path), "--out", str(tmp_path)])
    assert rc == 1
    assert "line 2" in capsys.readouterr().err


def test_unknown_scenario_exits_1(tmp_path, capsys):
    rc = main(["run", "no-such-scenario", "--out", str(tmp_path)])
    assert rc == 1
    assert "built-in" in capsys.readouterr().err


def test_nonconvergence_exits_2(tmp_path):
    path = tmp_path / "hard.json"
    path.write_text(json.dumps({
        "path_loss_db": [25.0, 31.0],
        "slot_lengths": [1.0, 1.0, 1.0],
        "harvests": [2.0, 1.0, 3.0],
        "solver": {"max_bcd_iters": 1},
    }))
    rc = main(["run", str(path), "--out", str(tmp_path / "out")])
    assert rc == 2


def test_oracle_subcommand(tmp_path, capsys):
    path = tmp_path / "small.json"
    path.write_text(json.dumps({
        "bandwidth_hz": 1.0,
        "noise_density": 1.0,
        "path_loss_db": [0.0],
        "slot_lengths": [1.0, 1.0],
        "harvests": [2.0, 2.0],
    }))
    rc = main(["oracle", str(path), "--step", "0.01"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "grid utility" in out

    rc = main(["oracle", "table1-s1tilde"])
    assert rc == 1  # too large for the exhaustive oracle


def test_reproduce_table1(tmp_path):
    rc = main(["reproduce", "table1", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "table1.csv")
    assert rows[0][:3] == ["sequence", "utility", "improvement_pct"]
    got = {r[0]: float(r[1]) for r in rows[1:]}
    assert got["s1"] == pytest.approx(75.7273, abs=0.01)
    assert got["s1tilde"] == pytest.approx(75.7325, abs=0.01)
    assert got["s2"] == pytest.approx(78.2339, abs=0.01)
    assert got["s2tilde"] == pytest.approx(78.2314, abs=0.01)


def test_reproduce_table2(tmp_path):
    rc = main(["reproduce", "table2", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "table2.csv")
    assert len(rows) == 7
    improvements = [float(r[2]) for r in rows[1:]]
    assert all(0.0 < v < 25.0 for v in improvements)


def test_reproduce_sweep_users(tmp_path):
    rc = main(["reproduce", "sweep-users", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "sweep_users.csv")
    assert rows[0][0] == "case"
    assert len(rows) == 1 + 3 * 7  # cases a..c, user counts 2..8
    by_key = {(r[0], int(r[1])): r for r in rows[1:]}
    # fairness and improvement both improve on the baseline everywhere
    for key, row in by_key.items():
        assert float(row[4]) > 0  # improvement_pct
        assert float(row[5]) >= float(row[6]) - 0.02  # jain_bcd vs jain_sg_tdma
