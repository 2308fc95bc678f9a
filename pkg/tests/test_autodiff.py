# tests/test_autodiff.py

import math

import numpy as np
import pytest

from src.autodiff import Graph, abs2, grad, jvp, linear, tanh
from src.errors import StructuralError
from src.helpers import finite_difference_gradient


@pytest.fixture
def graph():
    return Graph()


def test_tanh_derivative_at_zero(graph):
    x = graph.variable("x", 0.0)
    y = tanh(x)
    (dy,) = grad(y, [x])
    assert y.value == 0.0
    assert dy.value == pytest.approx(1.0, abs=1e-15)


def test_second_derivative_of_cube(graph):
    x = graph.variable("x", 2.0)
    y = x**3
    (dy,) = grad(y, [x])
    (d2y,) = grad(dy, [x])
    assert dy.value == pytest.approx(12.0)
    assert d2y.value == pytest.approx(12.0)


def test_product_gradient(graph):
    x = graph.variable("x", 3.0)
    y = graph.variable("y", 4.0)
    z = x * y
    dx, dy = grad(z, [x, y])
    assert z.value == 12.0
    assert dx.value == 4.0
    assert dy.value == 3.0


def test_exp_is_its_own_derivative(graph):
    x = graph.variable("x", 1.0)
    y = graph.exp(x)
    (dy,) = grad(y, [x])
    assert y.value == pytest.approx(math.e)
    assert dy.value == pytest.approx(math.e)


def test_values_refresh_after_eval(graph):
    x = graph.variable("x")
    y = graph.sin(x) * x
    (dy,) = grad(y, [x])
    assert y.value is None
    graph.eval({"x": 0.7})
    assert y.value == pytest.approx(math.sin(0.7) * 0.7)
    assert dy.value == pytest.approx(math.cos(0.7) * 0.7 + math.sin(0.7))


def test_gradient_is_linear(graph):
    x = graph.variable("x", 0.4)
    f = tanh(x) * x
    g = graph.cos(x)
    (df,) = grad(f, [x])
    (dg,) = grad(g, [x])
    (dh,) = grad(2.0 * f + 3.0 * g, [x])
    assert dh.value == pytest.approx(2.0 * df.value + 3.0 * dg.value, rel=1e-14)


def test_linear_node_matches_expanded_sum(graph):
    a = graph.variable("a", 1.5)
    b = graph.variable("b", -0.5)
    c = graph.variable("c", 2.0)
    y = linear([(a, b), (b, c)], [c])
    assert y.value == pytest.approx(1.5 * -0.5 + -0.5 * 2.0 + 2.0)
    da, db, dc = grad(y, [a, b, c])
    assert (da.value, db.value, dc.value) == pytest.approx((-0.5, 3.5, 0.5))


def test_reverse_gradient_matches_finite_differences(graph):
    names = ["p0", "p1", "p2"]
    point = np.array([0.3, -0.8, 1.1])
    params = [graph.variable(n, v) for n, v in zip(names, point)]
    y = tanh(params[0] * params[1] + graph.sqrt(abs2(params[1], params[2]))) / (1.0 + params[2] ** 2)
    gradient = np.array([g.value for g in grad(y, params)])

    def f(p):
        graph.eval(dict(zip(names, p)))
        return y.value

    numeric = finite_difference_gradient(f, point)
    np.testing.assert_allclose(gradient, numeric, rtol=1e-6, atol=1e-9)


def test_batched_forward_derivatives(graph):
    x = graph.variable("x", np.linspace(-1.0, 1.0, 5), batched=True)
    u = tanh(x)
    (u_x,) = jvp([u], x)
    (u_xx,) = jvp([u_x], x)
    t = np.tanh(np.linspace(-1.0, 1.0, 5))
    np.testing.assert_allclose(u_x.value, 1.0 - t**2, rtol=1e-14)
    np.testing.assert_allclose(u_xx.value, -2.0 * t * (1.0 - t**2), rtol=1e-12, atol=1e-15)


def test_batch_sum_gradient_reduces_lanes(graph):
    w = graph.variable("w", 2.0)
    x = graph.variable("x", np.array([1.0, 2.0, 3.0]), batched=True)
    loss = graph.batch_sum((w * x) ** 2)
    (dw,) = grad(loss, [w])
    assert loss.value == pytest.approx(4.0 * 14.0)
    assert dw.value == pytest.approx(2.0 * 2.0 * 14.0)


def test_graph_growth_is_bounded(graph):
    params = [graph.variable(f"w{i}", 0.1 * (i + 1)) for i in range(6)]
    x = graph.variable("x", np.linspace(0.0, 1.0, 4), batched=True)
    h = tanh(linear([(params[0], x)], [params[1]]))
    h = tanh(linear([(params[2], h)], [params[3]]))
    loss = graph.batch_sum(linear([(params[4], h)], [params[5]]) ** 2)
    before = len(graph)
    grad(loss, params)
    assert len(graph) - before <= 8 * before


def test_mixed_graphs_raise():
    a = Graph().variable("a", 1.0)
    b = Graph().variable("b", 2.0)
    with pytest.raises(StructuralError):
        a + b
    with pytest.raises(StructuralError):
        grad(a * 2.0, [b])


def test_wrt_must_be_free(graph):
    x = graph.variable("x", 1.0)
    y = x * x
    with pytest.raises(StructuralError):
        grad(y, [y])


def test_batched_output_needs_batched_wrt(graph):
    w = graph.variable("w", 1.0)
    x = graph.variable("x", np.ones(3), batched=True)
    with pytest.raises(StructuralError):
        grad(w * x, [w])


def test_unbound_variable_raises(graph):
    x = graph.variable("x")
    graph.variable("y", 1.0)
    x + 1.0
    with pytest.raises(StructuralError):
        graph.eval()


def test_lane_mismatch_raises(graph):
    graph.variable("x", np.ones(3), batched=True)
    graph.variable("y", np.ones(4), batched=True)
    with pytest.raises(StructuralError):
        graph.eval()


def test_duplicate_variable_name_raises(graph):
    graph.variable("x", 1.0)
    with pytest.raises(StructuralError):
        graph.variable("x", 2.0)
