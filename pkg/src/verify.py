# src/verify.py

"""
Invariant Suites
----------------
Quick self-checks behind `pinn-bench.py verify`: tableau order conditions,
loss gradients against finite differences, and reference-solver physics.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from .autodiff import Graph
from .continuous_time import CtProblem, CtTrainingSet
from .custom_logger import log
from .discrete_time import DtSnapshot, loss_terms as dt_loss_terms
from .helpers import finite_difference_gradient, relative_difference
from .metrics_io import rel_l2
from .network import MLPConfig, forward, forward_array, init_params, register_params
from .objective import LossFunction, LossTerm
from .problems import AllenCahnDt, BurgersCt, BurgersDt, SchrodingerCt
from .refsolve import SpectralConfig, allen_cahn_spectral, burgers_exact, mass, nls_spectral
from .sampler import Rng
from .tableau import acceptance_tolerance, gauss_legendre_tableau, irk_integrate, verify_tableau

TABLEAU_STAGES = (1, 2, 3, 5, 8, 16, 32)
FULL_TABLEAU_STAGES = TABLEAU_STAGES + (64, 100)
GRADIENT_TOLERANCE = 1e-4
SECOND_DERIVATIVE_TOLERANCE = 1e-5


@dataclass
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool


def _check(suite: str, name: str, value: float, tolerance: float) -> Check:
    passed = bool(np.isfinite(value) and value <= tolerance)
    log.debug(f"[{suite}] {name}: {value:.3e} (tolerance {tolerance:.1e}) {'ok' if passed else 'FAILED'}")
    return Check(suite, name, float(value), tolerance, passed)


# ----------------------------------------------------------------------
# tableau
# ----------------------------------------------------------------------


def gauss2_closed_form() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = math.sqrt(3.0) / 6.0
    c = np.array([0.5 - r, 0.5 + r])
    a = np.array([[0.25, 0.25 - r], [0.25 + r, 0.25]])
    b = np.array([0.5, 0.5])
    return c, a, b


def tableau_checks(stages: Sequence[int] = TABLEAU_STAGES) -> List[Check]:
    checks = []
    for q in stages:
        report = verify_tableau(gauss_legendre_tableau(q))
        tolerance = acceptance_tolerance(q)
        value = max(report.max_order_residual, report.node_symmetry, report.a_symmetry)
        if not (report.nodes_increasing and report.min_weight > 0.0):
            value = math.inf
        checks.append(_check("tableau", f"order conditions q={q}", value, tolerance))

    tableau = gauss_legendre_tableau(2)
    c, a, b = gauss2_closed_form()
    difference = max(np.max(np.abs(tableau.c - c)), np.max(np.abs(tableau.a - a)), np.max(np.abs(tableau.b - b)))
    checks.append(_check("tableau", "q=2 closed form", difference, 1e-14))

    y = irk_integrate(tableau, lambda y: -y, lambda y: -np.eye(1), 1.0, 0.025, 200)
    checks.append(_check("tableau", "y' = -y to t=5 (q=2)", abs(y[0] - math.exp(-5.0)) / math.exp(-5.0), 1e-8))
    return checks


# ----------------------------------------------------------------------
# gradients
# ----------------------------------------------------------------------


def gradient_error(network: MLPConfig, terms: List[LossTerm], seed: int = 3) -> float:
    """Relative difference between the loss gradient and central finite differences."""
    params = np.array(init_params(network, seed))
    with LossFunction(network, terms) as loss:
        _, gradient = loss(params)
        numeric = finite_difference_gradient(lambda p: loss(p)[0], params, step=1e-6)
    return relative_difference(gradient, numeric)


def small_ct_set(rng: Rng, components: int, n: int = 5) -> CtTrainingSet:
    return CtTrainingSet(
        t_u=rng.uniform(0.0, 1.0, n),
        x_u=rng.uniform(-1.0, 1.0, n),
        u=rng.normal(size=(n, 1)),
        t_f=rng.uniform(0.0, 1.0, n),
        x_f=rng.uniform(-1.0, 1.0, n),
        x_0=rng.uniform(-5.0, 5.0, n),
        h_0=rng.normal(size=(n, components)),
        t_b=rng.uniform(0.0, 1.5, n),
    )


def small_problems(q: int = 2, width: int = 8) -> Dict[str, Tuple[object, object]]:
    """Tiny instances of every loss: problem id -> (problem, training data)."""
    rng = Rng(11)
    tableau = gauss_legendre_tableau(q)
    dt_network = MLPConfig(1, 1, width, q + 1)
    snapshot = DtSnapshot(rng.uniform(-1.0, 1.0, 5), rng.normal(size=5), 0.1)
    return {
        "burgers-ct": (BurgersCt(MLPConfig(2, 1, width, 1)), small_ct_set(rng.derive(1), 1)),
        "nls-ct": (SchrodingerCt(MLPConfig(2, 1, width, 2)), small_ct_set(rng.derive(2), 2)),
        "burgers-dt": (BurgersDt(dt_network, tableau, dt=0.5), snapshot),
        "allen-cahn-dt": (AllenCahnDt(dt_network, tableau, dt=0.5), snapshot),
    }


def problem_terms(problem, data) -> List[LossTerm]:
    if isinstance(problem, CtProblem):
        return problem.loss_terms(data)
    return dt_loss_terms(problem, data)


def second_derivative_error(width: int = 8, seed: int = 5) -> float:
    """u_xx by nested forward-mode differentiation against a central second difference."""
    network = MLPConfig(1, 2, width, 1)
    params = np.array(init_params(network, seed))
    points = np.linspace(-0.9, 0.9, 7)
    graph = Graph()
    theta = register_params(graph, network, params)
    x = graph.variable("x", points, batched=True)
    u = forward(network, theta, [x], graph)
    u_x = graph.jvp(u, x)
    u_xx = graph.jvp(u_x, x)
    exact = np.asarray(u_xx[0].value, dtype=np.float64)
    h = 1e-4

    def f(z: np.ndarray) -> np.ndarray:
        return forward_array(network, params, z[:, None])[:, 0]

    numeric = (f(points + h) - 2.0 * f(points) + f(points - h)) / (h * h)
    return relative_difference(exact, numeric)


def gradient_checks() -> List[Check]:
    checks = []
    for problem_id, (problem, data) in small_problems().items():
        error = gradient_error(problem.network, problem_terms(problem, data))
        checks.append(_check("gradient", f"{problem_id} loss", error, GRADIENT_TOLERANCE))
    checks.append(_check("gradient", "second derivative u_xx", second_derivative_error(), SECOND_DERIVATIVE_TOLERANCE))
    return checks


# ----------------------------------------------------------------------
# reference physics
# ----------------------------------------------------------------------


def reference_checks() -> List[Check]:
    checks = []
    x = np.linspace(-1.0, 1.0, 65)
    oddness = max(np.max(np.abs(burgers_exact(t, x) + burgers_exact(t, -x))) for t in (0.1, 0.5, 0.99))
    checks.append(_check("reference", "Burgers odd in x", oddness, 1e-12))
    boundary = max(abs(burgers_exact(t, s)) for t in (0.1, 0.5, 0.99) for s in (-1.0, 1.0))
    checks.append(_check("reference", "Burgers zero at x=±1", boundary, 1e-12))

    nls = nls_spectral(SpectralConfig(modes=256, time_step=1e-4, length=10.0))
    initial = mass(nls, 0, 10.0)
    checks.append(_check("reference", "NLS mass at t=0", abs(initial - 8.0 * math.tanh(5.0)), 1e-6))
    drift = abs(mass(nls, -1, 10.0) - initial) / initial
    checks.append(_check("reference", "NLS mass conservation", drift, 1e-6))

    coarse = allen_cahn_spectral(SpectralConfig(modes=512, time_step=2.5e-4, integrator="etdrk4"))
    fine = allen_cahn_spectral(SpectralConfig(modes=512, time_step=1.25e-4, integrator="etdrk4"))
    change = rel_l2(coarse.values["u"][-1], fine.values["u"][-1])
    checks.append(_check("reference", "Allen-Cahn dt halving", change, 1e-7))
    return checks


SUITES: Dict[str, Callable[[], List[Check]]] = {
    "tableau": tableau_checks,
    "gradient": gradient_checks,
    "reference": reference_checks,
}


def run_checks(suites: Optional[Sequence[str]] = None, full: bool = False) -> List[Check]:
    """Runs the named suites (all by default); `full` adds the q=64 and q=100 tableaux."""
    checks: List[Check] = []
    for name in suites or SUITES:
        log.info(f"Running {name} checks")
        if name == "tableau" and full:
            checks.extend(tableau_checks(FULL_TABLEAU_STAGES))
        else:
            checks.extend(SUITES[name]())
    return checks


def display_checks(checks: Sequence[Check]) -> None:
    console = Console(stderr=True)
    table = Table(title="Invariant Checks")
    table.add_column("Suite", style="cyan", no_wrap=True)
    table.add_column("Check", style="magenta")
    table.add_column("Value", style="white")
    table.add_column("Tolerance", style="yellow")
    table.add_column("Result", style="green")
    for check in checks:
        table.add_row(
            check.suite,
            check.name,
            f"{check.value:.3e}",
            f"{check.tolerance:.1e}",
            "pass" if check.passed else "[bold red]FAIL[/bold red]",
        )
    console.print(table)
