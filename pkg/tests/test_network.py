# tests/test_network.py

import numpy as np
import pytest

from src.autodiff import Graph
from src.errors import ArgumentError, ParseError, StructuralError
from src.helpers import finite_difference_gradient
from src.network import (
    MLPConfig,
    forward,
    forward_array,
    init_params,
    load_checkpoint,
    register_params,
    save_checkpoint,
)


@pytest.fixture
def small_net():
    return MLPConfig(2, 1, 8, 1)


def evaluate_graph(config, params, points):
    graph = Graph()
    theta = register_params(graph, config, params)
    inputs = [graph.variable(f"in{d}", points[:, d], batched=True) for d in range(config.input_dim)]
    return forward(config, theta, inputs, graph)


@pytest.mark.parametrize(
    "config, count",
    [
        (MLPConfig(2, 8, 20, 1), 3021),
        (MLPConfig(2, 4, 100, 2), 41102),
        (MLPConfig(1, 1, 1, 1), 4),
    ],
)
def test_parameter_count(config, count):
    assert config.parameter_count == count
    assert len(init_params(config, 0)) == count


def test_init_is_deterministic(small_net):
    np.testing.assert_array_equal(init_params(small_net, 42), init_params(small_net, 42))
    assert not np.array_equal(init_params(small_net, 42), init_params(small_net, 43))


def test_init_biases_are_zero(small_net):
    params = init_params(small_net, 7)
    for offset, fan_in, fan_out in small_net.layers():
        bias = params[offset + fan_in * fan_out : offset + fan_in * fan_out + fan_out]
        assert np.all(bias == 0.0)


def test_init_params_are_read_only(small_net):
    params = init_params(small_net, 1)
    with pytest.raises(ValueError):
        params[0] = 1.0


def test_zero_params_give_zero_output(small_net):
    points = np.array([[0.1, 0.2], [0.9, -0.7]])
    (u,) = evaluate_graph(small_net, np.zeros(small_net.parameter_count), points)
    np.testing.assert_array_equal(u.value, np.zeros(2))


def test_hand_set_weights():
    config = MLPConfig(2, 1, 1, 1)
    params = np.array([1.0, 0.0, 0.0, 1.0, 0.0])
    (u,) = evaluate_graph(config, params, np.array([[0.5, 0.0]]))
    assert u.value[0] == pytest.approx(0.46211715726, abs=1e-11)


def test_graph_and_array_forward_agree():
    config = MLPConfig(2, 3, 6, 2)
    params = init_params(config, 9)
    points = np.random.default_rng(0).uniform(-1.0, 1.0, (7, 2))
    outputs = evaluate_graph(config, params, points)
    expected = forward_array(config, params, points)
    for k, output in enumerate(outputs):
        np.testing.assert_allclose(output.value, expected[:, k], rtol=1e-13, atol=1e-15)


def test_parameter_gradient_matches_finite_differences(small_net):
    params = np.array(init_params(small_net, 3))
    points = np.random.default_rng(1).uniform(-1.0, 1.0, (10, 2))
    graph = Graph()
    theta = register_params(graph, small_net, params)
    inputs = [graph.variable(f"in{d}", points[:, d], batched=True) for d in range(2)]
    (u,) = forward(small_net, theta, inputs, graph)
    total = graph.batch_sum(u)
    gradient = np.array([g.value for g in graph.grad(total, theta)])
    numeric = finite_difference_gradient(lambda p: forward_array(small_net, p, points).sum(), params)
    np.testing.assert_allclose(gradient, numeric, rtol=1e-5, atol=1e-8)


def test_zero_bias_network_is_odd_in_its_input():
    config = MLPConfig(1, 1, 5, 1)
    params = init_params(config, 4)
    x = np.linspace(-1.0, 1.0, 9)[:, None]
    np.testing.assert_allclose(forward_array(config, params, -x), -forward_array(config, params, x), atol=1e-15)


def test_flipping_all_weights_of_one_hidden_layer_net():
    config = MLPConfig(2, 1, 5, 1)
    params = init_params(config, 4)
    points = np.random.default_rng(2).uniform(-1.0, 1.0, (6, 2))
    np.testing.assert_allclose(
        forward_array(config, -params, points), forward_array(config, params, points), atol=1e-15
    )


def test_forward_rejects_wrong_input_count(small_net):
    graph = Graph()
    theta = register_params(graph, small_net, init_params(small_net, 0))
    with pytest.raises(StructuralError):
        forward(small_net, theta, [graph.variable("x", 0.1)], graph)


def test_invalid_config_raises():
    with pytest.raises(ArgumentError):
        MLPConfig(2, 0, 20, 1)
    with pytest.raises(ArgumentError):
        MLPConfig(2, 1, 20, 1, activation="relu")


def test_checkpoint_round_trip(tmp_path, small_net):
    params = init_params(small_net, 5)
    path = save_checkpoint(tmp_path / "checkpoint.txt", small_net, params)
    config, loaded = load_checkpoint(path)
    assert config == small_net
    np.testing.assert_array_equal(loaded, params)


def test_checkpoint_with_bad_value_reports_line(tmp_path):
    path = tmp_path / "broken.txt"
    path.write_text("1 1 1 1 tanh\n0.5\nnot-a-number\n0\n0\n")
    with pytest.raises(ParseError) as info:
        load_checkpoint(path)
    assert info.value.line == 3
