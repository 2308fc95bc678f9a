# tests/test_optimizer.py

import csv

import numpy as np
import pytest

from src.errors import ArgumentError
from src.optimizer import LBFGSConfig, Termination, bisection_line_search, minimize


def sphere(x):
    return float(x @ x), 2.0 * x


def rosenbrock(x):
    a, b = x
    value = (1.0 - a) ** 2 + 100.0 * (b - a * a) ** 2
    gradient = np.array([-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
    return value, gradient


def assert_wolfe(report, config):
    for step in report.steps:
        assert step.phi <= step.phi0 + config.wolfe_c1 * step.alpha * step.dphi0
        assert abs(step.dphi) <= -config.wolfe_c2 * step.dphi0


def test_sphere_converges_quickly():
    config = LBFGSConfig(grad_tolerance=1e-10)
    report = minimize(sphere, np.ones(3), config)
    assert report.grad_norm < 1e-10
    assert report.iterations <= 5
    assert report.reason == Termination.GRAD_TOL


def test_rosenbrock():
    config = LBFGSConfig(max_iterations=200, grad_tolerance=1e-10, objective_rel_tolerance=0.0)
    report = minimize(rosenbrock, np.array([-1.2, 1.0]), config)
    assert report.objective < 1e-10
    assert report.iterations <= 200
    assert_wolfe(report, config)
    np.testing.assert_allclose(report.params, [1.0, 1.0], atol=1e-4)


def test_history_is_non_increasing():
    report = minimize(rosenbrock, np.array([-1.2, 1.0]), LBFGSConfig(max_iterations=50))
    assert len(report.history) == report.iterations + 1
    assert all(later <= earlier for earlier, later in zip(report.history, report.history[1:]))


def test_starting_at_the_optimum():
    report = minimize(sphere, np.zeros(4))
    assert report.reason == Termination.GRAD_TOL
    assert report.iterations == 0
    assert report.objective == 0.0


def test_quadratic_with_exact_line_search_finishes_within_dimension():
    dim = 6
    rotation, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(dim, dim)))
    hessian = rotation @ np.diag(np.arange(1.0, dim + 1.0)) @ rotation.T
    target = np.linspace(-1.0, 1.0, dim)

    def quadratic(x):
        r = x - target
        return 0.5 * float(r @ hessian @ r), hessian @ r

    config = LBFGSConfig(memory=dim, max_iterations=dim, objective_rel_tolerance=0.0)
    report = minimize(quadratic, np.zeros(dim), config, line_search=bisection_line_search)
    assert report.iterations <= dim
    assert report.grad_norm < 1e-8


def test_non_finite_start_raises():
    with pytest.raises(ArgumentError):
        minimize(lambda x: (np.nan, np.zeros_like(x)), np.ones(2))


def test_invalid_wolfe_constants():
    with pytest.raises(ArgumentError):
        LBFGSConfig(wolfe_c1=0.9, wolfe_c2=0.1)
    with pytest.raises(ArgumentError):
        LBFGSConfig(memory=0)


def test_iteration_log(tmp_path):
    path = tmp_path / "logs" / "lbfgs.csv"
    report = minimize(rosenbrock, np.array([-1.2, 1.0]), LBFGSConfig(max_iterations=10, log_path=str(path)))
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["iteration", "objective", "grad_norm"]
    assert len(rows) == report.iterations + 2
    assert float(rows[-1][1]) == report.objective


def test_adam_warmup_then_lbfgs():
    config = LBFGSConfig(adam_warmup_iterations=20, adam_learning_rate=0.01, grad_tolerance=1e-10)
    report = minimize(sphere, np.ones(3), config)
    assert report.warmup_iterations == 20
    assert report.grad_norm < 1e-10


def quartic(x):
    return float(0.1 * np.sum(x**4)), 0.4 * x**3


def test_objective_tolerance_is_absolute_below_one():
    config = LBFGSConfig(grad_tolerance=0.0, objective_rel_tolerance=0.5)
    report = minimize(quartic, np.ones(2), config)
    assert report.reason == Termination.OBJ_TOL
    assert report.iterations == 1
    assert report.objective < 0.2


def test_objective_tolerance_is_relative_above_one():
    config = LBFGSConfig(grad_tolerance=0.0, objective_rel_tolerance=1e-3, max_iterations=3)
    report = minimize(lambda x: (1e6 + quartic(x)[0], quartic(x)[1]), np.ones(2), config)
    assert report.reason == Termination.OBJ_TOL
    assert report.iterations == 1
