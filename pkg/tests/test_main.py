# tests/test_main.py

import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.config_manager import ConfigManager
from src.main import EXIT_CONFIG, EXIT_OK, main
from src.metrics_io import read_grid, read_summary

PROBLEMS = Path(__file__).resolve().parents[1] / "configs" / "problems"

TINY_CT = {
    "network": {"hidden_layers": 1, "hidden_width": 4},
    "data": {"n_u": 10, "n_f": 10},
    "optimizer": {"max_iterations": 5, "progress_every": 0},
    "reference": {"t_points": 5, "x_points": 9},
}

TINY_DT = {
    "network": {"hidden_layers": 1, "hidden_width": 4},
    "data": {"n_n": 10},
    "stepping": {"q": 2, "dt": 0.8, "t_start": 0.1},
    "optimizer": {"max_iterations": 5, "progress_every": 0},
    "reference": {"t_points": 100, "x_points": 17},
}


@pytest.fixture
def config_manager(tmp_path):
    general = {"cache_directory": str(tmp_path / "cache"), "ask_for_problem_on_startup": False, "defaults": {}}
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(general))
    return ConfigManager(str(path), str(PROBLEMS))


def user_file(tmp_path, data, name="user.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def output_values(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.mark.parametrize("argv", [[], ["run", "--bogus"], ["gen-tableau"], ["run", "--problem", "heat-ct"]])
def test_bad_arguments_exit_2(argv, config_manager):
    assert main(argv, config_manager=config_manager) == EXIT_CONFIG


def test_invalid_stage_count_exit_2(tmp_path, config_manager):
    config = user_file(tmp_path, {"stepping": {"q": 0}})
    assert main(["run", "--problem", "burgers-dt", "--config", config], config_manager=config_manager) == EXIT_CONFIG
    assert main(["gen-tableau", "--q", "0"], config_manager=config_manager) == EXIT_CONFIG


def test_run_without_problem_exit_2(config_manager):
    assert main(["run"], config_manager=config_manager) == EXIT_CONFIG


def test_gen_tableau(tmp_path, capsys, config_manager):
    assert main(["gen-tableau", "--q", "2", "--out", str(tmp_path / "tab")], config_manager=config_manager) == EXIT_OK
    path = Path(output_values(capsys.readouterr().out)["tableau"])
    assert path.exists()
    assert path.name.startswith("gauss_q2_")


def test_gen_reference_burgers(tmp_path, capsys, config_manager):
    config = user_file(tmp_path, {"reference": {"t_points": 3, "x_points": 11}})
    argv = ["gen-reference", "--problem", "burgers", "--config", config, "--out", str(tmp_path / "ref")]
    assert main(argv, config_manager=config_manager) == EXIT_OK
    grid = read_grid(output_values(capsys.readouterr().out)["reference"])
    assert grid.t[0] == 0.0
    np.testing.assert_allclose(grid.values["u"][0], -np.sin(math.pi * grid.x), atol=1e-15)


def test_verify_tableau_suite(capsys, config_manager):
    assert main(["verify", "--suite", "tableau"], config_manager=config_manager) == EXIT_OK
    assert output_values(capsys.readouterr().out)["failed"] == "0"


def test_tiny_ct_run_is_reproducible(tmp_path, capsys, config_manager):
    config = user_file(tmp_path, TINY_CT)
    errors = []
    for name in ("a", "b"):
        argv = ["run", "--problem", "burgers-ct", "--config", config, "--seed", "9", "--out", str(tmp_path / name)]
        assert main(argv, config_manager=config_manager) == EXIT_OK
        values = output_values(capsys.readouterr().out)
        summary = read_summary(Path(values["summary"]) / "summary.yaml")
        assert summary.problem == "burgers-ct"
        assert summary.seed == 9
        assert summary.n_u == 10
        errors.append(values["rel_l2"])
    assert errors[0] == errors[1]
    assert float(errors[0]) >= 0.0


def test_tiny_dt_run(tmp_path, capsys, config_manager):
    config = user_file(tmp_path, TINY_DT)
    argv = ["run", "--problem", "burgers-dt", "--config", config, "--out", str(tmp_path / "dt")]
    assert main(argv, config_manager=config_manager) == EXIT_OK
    values = output_values(capsys.readouterr().out)
    directory = Path(values["summary"])
    summary = read_summary(directory / "summary.yaml")
    assert (summary.q, summary.n_n, summary.dt) == (2, 10, 0.8)
    grid = read_grid(directory / "grid.csv")
    assert grid.t.tolist() == [pytest.approx(0.9)]
    assert grid.x.size == 17
