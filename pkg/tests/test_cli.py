import logging
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from mgfnorm.alternatives import AlternativeSpec, sample_alternative
from mgfnorm.cli import main
from mgfnorm.io import format_sample_csv, parse_sample_csv
from mgfnorm.simulation import iid_test

FIXTURE = resources.files("mgfnorm") / "data" / "heavy_tailed_garch.csv"


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    logging.getLogger().handlers.clear()


def _write(tmp_path, x, name="x.csv"):
    path = tmp_path / name
    path.write_text(format_sample_csv(x))
    return path


def _config(out):
    return next(line for line in out.splitlines() if line.startswith("# config: mgfnorm "))


def test_test_command_report(tmp_path, capsys):
    path = _write(tmp_path, np.random.default_rng(0).standard_normal((60, 2)))
    out_csv = tmp_path / "r.csv"
    assert main(["test", "--input", str(path), "--reps", "200", "--beta", "3,5",
                 "--out", str(out_csv)]) == 0
    out = capsys.readouterr().out
    assert "--beta 3.0,5.0" in _config(out) and "--reps 200" in _config(out)
    assert "n=60 d=2" in out
    rows = out_csv.read_text().splitlines()
    assert rows[0] == "beta,t_raw,t_scaled,p_value,reject" and len(rows) == 3


def test_ragged_csv_is_data_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,4\n5\n")
    assert main(["test", "--input", str(path)]) == 3
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["test"], ["bogus"], ["critvals", "--d", "2", "--n", "x"],
                                  ["power", "--alt", "cauchy", "--d", "2", "--n", "20"],
                                  ["power", "--alt", "t:5", "--d", "2", "--n", "20", "--alpha", "1.5"]])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_numerical_failure_exit_4(tmp_path, capsys):
    # one outlier among many rows: |y|^2 = n - 1 overflows exp at beta ~ 1
    x = np.zeros((1500, 1))
    x[0] = 1e6
    path = _write(tmp_path, x)
    assert main(["test", "--input", str(path), "--beta", "1.0001", "--reps", "100"]) == 4
    assert "numerical failure" in capsys.readouterr().err


def test_beta_warning(tmp_path, caplog):
    path = _write(tmp_path, np.random.default_rng(1).standard_normal((30, 2)))
    assert main(["test", "--input", str(path), "--beta", "1.5", "--reps", "100"]) == 0
    assert "beta=1.5 <= 2" in caplog.text


def _run_config_line(line, tmp_path):
    argv = line.split(" ", 3)[3].split()
    return subprocess.run([sys.executable, "-m", "mgfnorm.cli", *argv], capture_output=True,
                          text=True, cwd=tmp_path, check=True).stdout


def test_config_line_reproduces_output_byte_for_byte(tmp_path, capsys):
    assert main(["critvals", "--d", "2", "--n", "20", "--reps", "300", "--seed", "5"]) == 0
    first = capsys.readouterr().out
    again = _run_config_line(_config(first), tmp_path)
    assert again == first


def test_garch_commands_round_trip(tmp_path, capsys):
    sim = tmp_path / "sim.csv"
    assert main(["garch-sim", "--n", "400", "--r", "0.3", "--seed", "3", "--out", str(sim)]) == 0
    x = parse_sample_csv(sim.read_text())
    assert x.shape == (400, 2)
    params = tmp_path / "p.csv"
    assert main(["garch-fit", "--input", str(sim), "--structure", "diagonal-gamma",
                 "--out", str(params)]) == 0
    assert "converged=True" in capsys.readouterr().out
    sim2 = tmp_path / "sim2.csv"
    assert main(["garch-sim", "--params", str(params), "--n", "50", "--out", str(sim2)]) == 0
    assert parse_sample_csv(sim2.read_text()).shape == (50, 2)
    assert main(["garch-fit", "--input", str(sim), "--json", "--structure", "diagonal"]) == 0
    assert '"Gamma1_12": 0.0' in capsys.readouterr().out


def test_fixture_is_rejected_by_both_tests(capsys):
    path = str(FIXTURE)
    assert main(["test", "--input", path, "--reps", "200"]) == 0
    assert "-> reject" in capsys.readouterr().out
    assert main(["garch-test", "--input", path, "--bootstrap", "99", "--structure",
                 "diagonal-gamma"]) == 0
    out = capsys.readouterr().out
    assert "p=0.0100" in out and "-> reject" in out


def test_power_command(capsys):
    assert main(["power", "--alt", "t:5", "--d", "2", "--n", "30", "--reps", "200"]) == 0
    line = capsys.readouterr().out.splitlines()[-1].split(",")
    assert line[0] == "t:5" and 0.0 <= float(line[6]) <= 1.0


def test_t5_rejection_share_across_seeds():
    hits = 0
    seeds = 200
    for s in range(seeds):
        x = sample_alternative(AlternativeSpec("t", (5.0,)), 50, 2, np.random.default_rng(1000 + s))
        hits += iid_test(x, 3.0, reps=400, seed=1).reject
    assert hits / seeds == pytest.approx(0.588, abs=0.1)
