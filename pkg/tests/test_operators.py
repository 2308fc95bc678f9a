# tests/test_operators.py

import math

import numpy as np
import pytest

from src.autodiff import Graph
from src.problems.operators import (
    BURGERS_NU,
    allen_cahn_operator,
    burgers_operator,
    burgers_residual,
    schrodinger_residual,
)


def test_burgers_zero_field():
    assert burgers_residual(0.0, 0.0, 0.0, 0.0) == 0.0


def test_burgers_linear_field():
    assert burgers_residual(0.3, 0.0, 1.0, 0.0) == pytest.approx(0.3)


def test_burgers_non_solution_field():
    s = math.sin(math.pi / 4)
    c = math.cos(math.pi / 4)
    residual = burgers_residual(s, -s, math.pi * c, -math.pi**2 * s)
    expected = -math.sqrt(2) / 2 + 0.5 * math.pi + 0.01 * math.pi * math.sqrt(2) / 2
    assert residual == pytest.approx(expected, abs=1e-14)


def test_burgers_residual_is_linear_in_time_and_diffusion_terms():
    u, u_t, u_x, u_xx = 0.7, -0.4, 1.3, 2.1
    for a, b in [(2.0, -3.0), (0.5, 7.0)]:
        difference = burgers_residual(u, a * u_t, u_x, b * u_xx) - burgers_residual(u, 0.0, u_x, 0.0)
        assert difference == pytest.approx(a * u_t - BURGERS_NU * b * u_xx, abs=1e-12)


def test_burgers_residual_on_graph_variables():
    graph = Graph()
    fields = [graph.variable(name, value) for name, value in zip("abcd", (0.3, 0.0, 1.0, 0.0))]
    assert burgers_residual(*fields).value == pytest.approx(0.3)


def test_schrodinger_zero_field():
    assert schrodinger_residual(0.0, 0.0, 0.0, 0.0, 0.0, 0.0) == (0.0, 0.0)


def test_schrodinger_constant_field():
    assert schrodinger_residual(1.0, 0.0, 0.0, 0.0, 0.0, 0.0) == (1.0, 0.0)


def test_schrodinger_plane_wave_dispersion():
    k = 1.0
    omega = 0.5 * k * k - 1.0
    for t, x in [(0.0, 0.0), (0.3, -1.2), (1.0, 2.5), (1.5, -4.0), (0.7, 0.9)]:
        theta = k * x - omega * t
        u, v = math.cos(theta), math.sin(theta)
        real, imag = schrodinger_residual(u, v, omega * v, -omega * u, -k * k * u, -k * k * v)
        assert abs(real) < 1e-14
        assert abs(imag) < 1e-14


def test_schrodinger_gauge_symmetry():
    phi = 0.83
    cos, sin = math.cos(phi), math.sin(phi)

    def rotate(a, b):
        return cos * a - sin * b, sin * a + cos * b

    u, v, u_t, v_t, u_xx, v_xx = 0.4, -0.9, 1.1, 0.2, -0.6, 1.7
    rotated = schrodinger_residual(*rotate(u, v), *rotate(u_t, v_t), *rotate(u_xx, v_xx))
    expected = rotate(*schrodinger_residual(u, v, u_t, v_t, u_xx, v_xx))
    np.testing.assert_allclose(rotated, expected, rtol=0, atol=1e-12)


def test_schrodinger_on_graph_matches_floats():
    graph = Graph()
    values = (0.4, -0.9, 1.1, 0.2, -0.6, 1.7)
    fields = [graph.variable(f"h{k}", value) for k, value in enumerate(values)]
    real, imag = schrodinger_residual(*fields)
    assert (real.value, imag.value) == pytest.approx(schrodinger_residual(*values), rel=1e-14)


def test_allen_cahn_operator():
    assert allen_cahn_operator(0.5, 0.0) == pytest.approx(-1.875)
    assert allen_cahn_operator(0.0, 1.0) == pytest.approx(-1e-4)


def test_operators_accept_arrays():
    u = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(burgers_operator(u, np.ones(3), np.zeros(3)), u)
    np.testing.assert_allclose(allen_cahn_operator(u, np.zeros(3)), 5.0 * u**3 - 5.0 * u)
