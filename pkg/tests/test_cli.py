"""Exit codes, CSV emission, and determinism of the command line tool."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from wpcn_ee import MODE_IELCN, MODE_PWPCN, MODE_QOS, RAW_COLUMNS
from wpcn_ee.cli import main


def cfg_file(tmp_path: Path, payload: dict, name: str = "cfg.json") -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_solve_best_effort_to_stdout(capsys):
    rc = main(["solve-best-effort", "--seed", "3"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == ",".join(RAW_COLUMNS)
    row = lines[1].split(",")
    assert row[3] == "ee_optimal"
    assert row[4] in (MODE_PWPCN, MODE_IELCN)
    assert row[11] == "1"
    assert float(row[5]) > 0.0


def test_solve_qos_requires_a_floor(capsys):
    rc = main(["solve-qos"])
    assert rc == 1
    assert "Rmin_bits" in capsys.readouterr().err


def test_solve_qos_with_floor(tmp_path, capsys):
    cfg = cfg_file(tmp_path, {"system": {"Rmin_bits": 100.0}, "geometry": {"K": 3}})
    rc = main(["solve-qos", "--config", cfg, "--seed", "5"])
    assert rc == 0
    row = capsys.readouterr().out.strip().splitlines()[1].split(",")
    assert row[4] == MODE_QOS
    assert float(row[6]) >= 100.0 * (1.0 - 1e-9)


def test_infeasible_floor_exit_codes(tmp_path, capsys):
    cfg = cfg_file(tmp_path, {"system": {"Rmin_bits": 1e9}, "geometry": {"K": 2}})
    assert main(["solve-qos", "--config", cfg]) == 2
    capsys.readouterr()
    assert main(["feasibility", "--config", cfg]) == 2
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "R_star_bits,Rmin_bits,feasible"
    assert out[1].endswith(",0")

    easy = cfg_file(tmp_path, {"system": {"Rmin_bits": 10.0}, "geometry": {"K": 2}}, "easy.json")
    assert main(["feasibility", "--config", easy]) == 0
    assert capsys.readouterr().out.strip().splitlines()[1].endswith(",1")


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_config_errors_exit_one(tmp_path, capsys):
    bad = cfg_file(tmp_path, {"system": {"wattage": 3}})
    assert main(["solve-best-effort", "--config", bad]) == 1
    assert "configuration error" in capsys.readouterr().err
    assert main(["solve-best-effort", "--config", str(tmp_path / "missing.json")]) == 1


def test_output_files_are_reproducible(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert main(["solve-best-effort", "--seed", "9", "--out", str(a)]) == 0
    assert main(["solve-best-effort", "--seed", "9", "--out", str(b)]) == 0
    assert main(["solve-best-effort", "--seed", "10", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_oracle_check_agrees(tmp_path, capsys):
    cfg = cfg_file(
        tmp_path,
        {"geometry": {"K": 1}, "grid": {"n_tau": 25, "n_p": 15}},
    )
    rc = main(["oracle-check", "--config", cfg, "--seed", "2"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    solver_row = lines[1].split(",")
    oracle_row = lines[2].split(",")
    assert solver_row[0] == "solve_best_effort" and oracle_row[0] == "grid_oracle"
    assert solver_row[7] == "1" and oracle_row[7] == "1"


def test_oracle_check_needs_a_small_instance(capsys):
    # default geometry has five users; the grid oracle refuses
    assert main(["oracle-check"]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_sweep_prints_both_paths(tmp_path, capsys):
    cfg = cfg_file(
        tmp_path,
        {
            "geometry": {"K": 2},
            "sweep": {"axis": "Pmax_dBm", "values": [43.0], "trials": 1, "base_seed": 1},
            "schemes": ["ee_optimal"],
            "output": str(tmp_path / "s.csv"),
        },
    )
    rc = main(["sweep", "--config", cfg])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines == [str(tmp_path / "s.csv"), str(tmp_path / "s_mean.csv")]
    assert Path(lines[0]).exists() and Path(lines[1]).exists()


def test_convergence_trace_output(tmp_path, capsys):
    cfg = cfg_file(tmp_path, {"system": {"Rmin_bits": 50.0}, "geometry": {"K": 2}})
    rc = main(["convergence", "--config", cfg, "--seed", "4"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "iteration,q_bits_per_joule,T_bits"
    assert len(lines) >= 2

    hopeless = cfg_file(tmp_path, {"system": {"Rmin_bits": 1e9}, "geometry": {"K": 2}}, "h.json")
    assert main(["convergence", "--config", hopeless]) == 2


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "wpcn_ee.cli", "solve-best-effort", "--seed", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith(",".join(RAW_COLUMNS[:2]))
