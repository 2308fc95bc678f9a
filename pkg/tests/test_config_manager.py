# tests/test_config_manager.py

from pathlib import Path

import pytest
import yaml

from src.config_manager import ConfigManager, RunConfig
from src.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def manager():
    return ConfigManager(str(CONFIGS / "config.yaml"), str(CONFIGS / "problems"))


@pytest.fixture
def tmp_manager(tmp_path):
    general = {
        "cache_directory": "my-cache",
        "defaults": {"seed": 7, "workers": 2, "optimizer": {"max_iterations": 100}},
    }
    profile = {
        "problem": "burgers-ct",
        "network": {"hidden_layers": 2, "hidden_width": 10},
        "data": {"n_u": 20, "n_f": 50},
        "optimizer": {"max_iterations": 200},
        "paper_scale": {"data": {"n_f": 10000}, "optimizer": {"max_iterations": 50000}},
    }
    problems = tmp_path / "problems"
    problems.mkdir()
    (tmp_path / "config.yaml").write_text(yaml.safe_dump(general))
    (problems / "burgers-ct.yaml").write_text(yaml.safe_dump(profile))
    return ConfigManager(str(tmp_path / "config.yaml"), str(problems))


def write_user(tmp_path, data, name="user.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def test_shipped_profiles_resolve(manager):
    assert manager.list_problems() == ["burgers-ct", "nls-ct", "burgers-dt", "allen-cahn-dt"]
    for problem in manager.list_problems():
        config = manager.resolve_run_config(problem)
        assert config.problem == problem
        assert config.discrete == problem.endswith("-dt")


def test_shipped_burgers_ct_matches_benchmark_setup(manager):
    config = manager.resolve_run_config("burgers-ct")
    assert (config.network.hidden_layers, config.network.hidden_width) == (8, 20)
    assert config.data.n_u == 100
    assert config.reference["t_points"] == 100


def test_paper_scale_block_is_applied(manager):
    small = manager.resolve_run_config("burgers-dt")
    large = manager.resolve_run_config("burgers-dt", paper_scale=True)
    assert small.stepping.q == 100
    assert large.stepping.q == 500
    assert large.optimizer.max_iterations == 50000


def test_merge_order(tmp_manager, tmp_path):
    config = tmp_manager.resolve_run_config("burgers-ct")
    assert config.seed == 7
    assert config.workers == 2
    assert config.cache_directory == "my-cache"
    assert config.optimizer.max_iterations == 200
    assert config.data.n_f == 50

    scaled = tmp_manager.resolve_run_config("burgers-ct", paper_scale=True)
    assert scaled.data.n_f == 10000

    user = write_user(tmp_path, {"data": {"n_f": 75}, "seed": 11})
    config = tmp_manager.resolve_run_config("burgers-ct", paper_scale=True, user_config=user)
    assert config.data.n_f == 75
    assert config.seed == 11
    assert config.data.n_u == 20

    config = tmp_manager.resolve_run_config(
        "burgers-ct", user_config=user, overrides={"seed": 3, "network": {"hidden_width": 30}}
    )
    assert config.seed == 3
    assert config.network.hidden_width == 30
    assert config.network.hidden_layers == 2


def test_problem_taken_from_user_file(tmp_manager, tmp_path):
    user = write_user(tmp_path, {"problem": "burgers-ct"})
    assert tmp_manager.resolve_run_config(user_config=user).problem == "burgers-ct"


def test_missing_problem_raises(tmp_manager):
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config()
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config("nls-ct")


def test_missing_user_file_raises(tmp_manager, tmp_path):
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config("burgers-ct", user_config=tmp_path / "absent.yaml")


def test_unknown_key_raises(tmp_manager, tmp_path):
    user = write_user(tmp_path, {"data": {"n_x": 3}})
    with pytest.raises(ConfigError, match="n_x"):
        tmp_manager.resolve_run_config("burgers-ct", user_config=user)


def test_wrong_type_raises(tmp_manager):
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config("burgers-ct", overrides={"seed": "abc"})
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config("burgers-ct", overrides={"network": 4})


def test_invalid_optimizer_settings_become_config_errors(tmp_manager):
    with pytest.raises(ConfigError):
        tmp_manager.resolve_run_config("burgers-ct", overrides={"optimizer": {"wolfe_c1": 0.95}})


def test_get_general_dot_notation(manager):
    assert manager.get_general("logging.console_log_level") == "INFO"
    assert manager.get_general("logging.missing", "fallback") == "fallback"


@pytest.mark.parametrize(
    "data",
    [
        {"problem": "heat-ct"},
        {"problem": "burgers-ct", "seed": -1},
        {"problem": "burgers-ct", "data": {"n_u": 0, "n_f": 0}},
        {"problem": "burgers-ct", "data": {"n_u": -5, "n_f": 10}},
        {"problem": "burgers-ct", "data": {"n_u": 10, "ic_fraction": 1.5}},
        {"problem": "burgers-ct", "network": {"hidden_layers": 0}, "data": {"n_u": 10}},
        {"problem": "burgers-ct", "data": {"n_u": 10}, "reference": {"modes": 64}},
        {"problem": "nls-ct", "data": {"n_0": 0, "n_f": 10}},
        {"problem": "nls-ct", "data": {"n_0": 5, "n_f": 10}},
        {"problem": "nls-ct", "data": {"n_0": 5, "n_b": 5}, "reference": {"modes": 100}},
        {"problem": "allen-cahn-dt", "data": {"n_n": 10}, "reference": {"integrator": "euler"}},
        {"problem": "burgers-dt", "data": {"n_n": 0}},
        {"problem": "burgers-dt", "data": {"n_n": 10}, "stepping": {"q": 0}},
        {"problem": "burgers-dt", "data": {"n_n": 10}, "stepping": {"dt": 0.0}},
        {"problem": "burgers-dt", "data": {"n_n": 10}, "stepping": {"precision_bits": 32}},
        {"problem": "allen-cahn-dt", "data": {"n_n": 10}, "workers": 0},
    ],
)
def test_invalid_run_configs(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_to_dict_round_trip(manager):
    config = manager.resolve_run_config("allen-cahn-dt")
    assert RunConfig.from_dict(config.to_dict()) == config


def test_schrodinger_boundary_count_is_required():
    config = RunConfig.from_dict({"problem": "nls-ct", "data": {"n_0": 5, "n_b": 1}})
    assert config.data.n_b == 1
    with pytest.raises(ConfigError, match="n_b"):
        RunConfig.from_dict({"problem": "nls-ct", "data": {"n_0": 5, "n_b": 0, "n_f": 100}})
