# tests/test_pipeline.py

from pathlib import Path

import numpy as np
import pytest

from src.config_manager import ConfigManager, RunConfig
from src.metrics_io import read_summary
from src.network import load_checkpoint
from src.pipeline import CHECKPOINT_FILE, GRID_FILE, SUMMARY_FILE, build_problem, run_pipeline
from src.problems import AllenCahnDt, BurgersCt
from src.sweep import run_sweep

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def tiny(tmp_path, problem, **sections):
    data = {
        "problem": problem,
        "seed": 4,
        "output_directory": str(tmp_path / "results"),
        "cache_directory": str(tmp_path / "cache"),
        "network": {"hidden_layers": 1, "hidden_width": 4},
        "optimizer": {"max_iterations": 5, "progress_every": 0},
    }
    data.update(sections)
    return RunConfig.from_dict(data)


@pytest.fixture
def burgers_config(tmp_path):
    return tiny(
        tmp_path, "burgers-ct", data={"n_u": 10, "n_f": 20}, reference={"t_points": 5, "x_points": 9}
    )


def test_build_problem(tmp_path, burgers_config):
    problem = build_problem(burgers_config)
    assert isinstance(problem, BurgersCt)
    assert problem.network.parameter_count == 2 * 4 + 4 + 4 + 1

    dt = tiny(tmp_path, "allen-cahn-dt", data={"n_n": 5}, stepping={"q": 3})
    problem = build_problem(dt)
    assert isinstance(problem, AllenCahnDt)
    assert problem.network.output_dim == 4
    assert (tmp_path / "cache" / "tableaux").is_dir()


def test_run_writes_outputs(burgers_config):
    result = run_pipeline(burgers_config)
    assert result.directory.name == "burgers-ct-seed4"
    for name in (GRID_FILE, SUMMARY_FILE, CHECKPOINT_FILE):
        assert (result.directory / name).exists()
    summary = read_summary(result.directory / SUMMARY_FILE)
    assert summary == result.summary
    assert summary.iterations <= 5
    assert summary.n_n == 0 and summary.q == 0
    network, params = load_checkpoint(result.directory / CHECKPOINT_FILE)
    assert network.parameter_count == params.size
    np.testing.assert_array_equal(params, result.params)
    assert result.grid.values["u"].shape == (5, 9)
    assert list(summary.snapshot_errors) == ["0.25", "0.50", "0.75"]
    assert all(error > 0.0 for error in summary.snapshot_errors.values())


def test_run_is_deterministic(burgers_config):
    first = run_pipeline(burgers_config, write_outputs=False)
    second = run_pipeline(burgers_config, write_outputs=False)
    first.summary.wall_time_seconds = second.summary.wall_time_seconds = 0.0
    assert first.summary == second.summary
    np.testing.assert_array_equal(first.params, second.params)
    assert first.directory is None


def test_worker_count_does_not_change_results(tmp_path, burgers_config):
    threaded = RunConfig.from_dict({**burgers_config.to_dict(), "workers": 3, "chunk_size": 4})
    single = RunConfig.from_dict({**burgers_config.to_dict(), "chunk_size": 4})
    a = run_pipeline(single, write_outputs=False)
    b = run_pipeline(threaded, write_outputs=False)
    assert a.summary.rel_l2 == b.summary.rel_l2
    np.testing.assert_array_equal(a.params, b.params)


def test_burgers_without_initial_and_boundary_data_does_not_converge(tmp_path):
    config = tiny(
        tmp_path,
        "burgers-ct",
        network={"hidden_layers": 2, "hidden_width": 8},
        data={"n_u": 0, "n_f": 200},
        optimizer={"max_iterations": 200, "progress_every": 0},
        reference={"t_points": 11, "x_points": 21},
    )
    result = run_pipeline(config, write_outputs=False)
    assert result.summary.iterations > 0
    assert result.summary.n_u == 0
    assert result.summary.rel_l2 > 0.1


def test_multi_step_march_reports_final_time(tmp_path):
    config = tiny(
        tmp_path,
        "burgers-dt",
        data={"n_n": 8},
        stepping={"q": 2, "dt": 0.1, "t_start": 0.1, "steps": 2},
        reference={"t_points": 100, "x_points": 17},
    )
    result = run_pipeline(config, write_outputs=False)
    assert result.grid.t.tolist() == [pytest.approx(0.3)]
    assert result.summary.q == 2
    assert result.summary.iterations <= 10
    assert result.summary.snapshot_errors == {}


# ----------------------------------------------------------------------
# benchmark scale
# ----------------------------------------------------------------------


@pytest.fixture
def shipped():
    return ConfigManager(str(CONFIGS / "config.yaml"), str(CONFIGS / "problems"))


def shipped_config(shipped, tmp_path, problem, **overrides):
    return shipped.resolve_run_config(
        problem,
        overrides={"output_directory": str(tmp_path), "cache_directory": str(tmp_path / "cache"), **overrides},
    )


@pytest.mark.slow
def test_burgers_ct_accuracy(shipped, tmp_path):
    errors = []
    for seed in (1, 2, 3):
        config = shipped_config(shipped, tmp_path, "burgers-ct", seed=seed, data={"n_f": 10000})
        errors.append(run_pipeline(config, write_outputs=False).summary.rel_l2)
    assert np.median(errors) <= 5e-3


@pytest.mark.slow
def test_burgers_dt_single_step_accuracy(shipped, tmp_path):
    config = shipped_config(shipped, tmp_path, "burgers-dt")
    assert run_pipeline(config, write_outputs=False).summary.rel_l2 <= 5e-3


@pytest.mark.slow
def test_burgers_dt_stage_count_trend(shipped, tmp_path):
    base = shipped_config(shipped, tmp_path, "burgers-dt")
    results = run_sweep(base, [("q", [1, 4, 32])], tmp_path / "ledger.yaml")
    errors = [summary.rel_l2 for _, summary in results]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] <= 5e-3


@pytest.mark.slow
def test_schrodinger_accuracy(shipped, tmp_path):
    config = shipped_config(shipped, tmp_path, "nls-ct", data={"n_0": 50, "n_b": 50, "n_f": 20000})
    summary = run_pipeline(config, write_outputs=False).summary
    assert summary.rel_l2 <= 2e-2
    assert list(summary.snapshot_errors) == ["0.59", "0.79", "0.98"]


@pytest.mark.slow
def test_allen_cahn_internal_layers(shipped, tmp_path):
    config = shipped_config(shipped, tmp_path, "allen-cahn-dt")
    result = run_pipeline(config, write_outputs=False)
    assert result.summary.rel_l2 <= 5e-2
    u = result.grid.values["u"][0]
    x = result.grid.x
    outer = np.abs(x) > 0.9
    assert np.all(np.abs(u[outer]) > 0.8)
    signs = np.sign(u[np.abs(u) > 0.5])
    changes = np.count_nonzero(np.diff(signs))
    assert changes >= 2


@pytest.mark.slow
def test_burgers_ct_depth_trend(shipped, tmp_path):
    base = shipped_config(shipped, tmp_path, "burgers-ct")
    results = run_sweep(base, [("neurons", [40]), ("layers", [2, 4])], tmp_path / "ledger.yaml")
    shallow, deep = [summary.rel_l2 for _, summary in results]
    assert deep < shallow


@pytest.mark.slow
def test_burgers_dt_more_stages_at_large_step(shipped, tmp_path):
    base = shipped_config(shipped, tmp_path, "burgers-dt", stepping={"dt": 0.8})
    results = run_sweep(base, [("q", [8, 32])], tmp_path / "ledger.yaml")
    few, many = [summary.rel_l2 for _, summary in results]
    assert few > many
