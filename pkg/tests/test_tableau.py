# tests/test_tableau.py

import math

import numpy as np
import pytest

from src.errors import ArgumentError, ParseError
from src.tableau import (
    ButcherTableau,
    cache_path,
    gauss_legendre_tableau,
    irk_integrate,
    legendre_roots,
    load_or_generate,
    read_tableau,
    stability_function,
    verify_tableau,
    write_tableau,
)

R3 = math.sqrt(3.0) / 6.0


def golub_welsch_nodes(q):
    k = np.arange(1, q)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    jacobi = np.diag(off, 1) + np.diag(off, -1)
    return np.sort((1.0 + np.linalg.eigvalsh(jacobi)) / 2.0)


def test_roots_q1():
    assert legendre_roots(1) == [0.5]


def test_roots_q2():
    np.testing.assert_allclose(legendre_roots(2), [0.5 - R3, 0.5 + R3], rtol=0, atol=1e-15)


def test_roots_q5_match_eigenvalue_nodes():
    np.testing.assert_allclose(legendre_roots(5, 128), golub_welsch_nodes(5), rtol=0, atol=1e-14)


def test_midpoint_tableau():
    tableau = gauss_legendre_tableau(1)
    np.testing.assert_array_equal(tableau.c, [0.5])
    np.testing.assert_array_equal(tableau.b, [1.0])
    np.testing.assert_array_equal(tableau.a, [[0.5]])


def test_two_stage_closed_form():
    tableau = gauss_legendre_tableau(2)
    np.testing.assert_allclose(tableau.a, [[0.25, 0.25 - R3], [0.25 + R3, 0.25]], rtol=0, atol=1e-15)
    np.testing.assert_allclose(tableau.b, [0.5, 0.5], rtol=0, atol=1e-15)


def test_q1_residuals_vanish():
    report = verify_tableau(gauss_legendre_tableau(1))
    assert report.max_order_residual <= 1e-15
    assert report.node_symmetry <= 1e-15
    assert report.passes()


def test_perturbed_weight_is_reported():
    tableau = gauss_legendre_tableau(3)
    b = tableau.b.copy()
    b[0] += 1e-6
    perturbed = ButcherTableau(3, tableau.c.copy(), tableau.a.copy(), b, tableau.precision_bits)
    report = verify_tableau(perturbed)
    assert report.weight_sum == pytest.approx(1e-6, rel=1e-6)
    assert not report.passes()


@pytest.mark.parametrize("q", [3, 8, 32])
def test_generated_tableau_invariants(q):
    tableau = gauss_legendre_tableau(q)
    report = verify_tableau(tableau)
    assert report.passes(1e-12)
    assert report.nodes_increasing
    assert report.min_weight > 0.0
    assert np.all((tableau.c > 0.0) & (tableau.c < 1.0))


@pytest.mark.slow
def test_hundred_stage_tableau():
    report = verify_tableau(gauss_legendre_tableau(100, 512))
    assert report.max_order_residual <= 1e-12
    assert report.a_symmetry <= 1e-12


def test_two_stage_irk_decay():
    y = irk_integrate(gauss_legendre_tableau(2), lambda y: -y, lambda y: -np.eye(1), 1.0, 0.025, 200)
    assert abs(y[0] - math.exp(-5.0)) / math.exp(-5.0) < 1e-8


def test_four_stage_irk_decay_with_large_steps():
    y = irk_integrate(gauss_legendre_tableau(4), lambda y: -y, lambda y: -np.eye(1), 1.0, 0.5, 10)
    assert abs(y[0] - math.exp(-5.0)) / math.exp(-5.0) < 1e-8


@pytest.mark.parametrize("q", [1, 2, 4])
def test_a_stability_spot_check(q):
    assert abs(stability_function(gauss_legendre_tableau(q), -1e6)) < 1.0


def test_cache_file_round_trip_is_bit_exact(tmp_path):
    tableau = gauss_legendre_tableau(7)
    path = write_tableau(tmp_path / "q7.txt", tableau)
    assert path.read_text().splitlines()[0] == f"q=7 precision_bits={tableau.precision_bits}"
    loaded = read_tableau(path)
    np.testing.assert_array_equal(loaded.c, tableau.c)
    np.testing.assert_array_equal(loaded.b, tableau.b)
    np.testing.assert_array_equal(loaded.a, tableau.a)


def test_load_or_generate_uses_the_cache(tmp_path):
    first = load_or_generate(4, 128, tmp_path)
    path = cache_path(tmp_path, 4, 128)
    assert path.exists()
    second = load_or_generate(4, 128, tmp_path)
    np.testing.assert_array_equal(first.a, second.a)


def test_malformed_cache_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("q=2 precision_bits=128\n0.2 0.8\n0.5\n0.1 0.1\n0.1 0.1\n")
    with pytest.raises(ParseError) as info:
        read_tableau(path)
    assert info.value.line == 3


def test_invalid_arguments():
    with pytest.raises(ArgumentError):
        gauss_legendre_tableau(0)
    with pytest.raises(ArgumentError):
        legendre_roots(4, 32)
