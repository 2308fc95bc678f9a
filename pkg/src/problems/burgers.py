# src/problems/burgers.py

"""
Burgers' equation, u_t + u u_x − (0.01/π) u_xx = 0 on x ∈ [−1, 1],
u(0, x) = −sin(πx), u(t, ±1) = 0, in continuous- and discrete-time form.
"""

from typing import Dict, List, Mapping, Optional

import numpy as np

from ..autodiff import Graph, Variable
from ..continuous_time import BoundaryKind, CtProblem, CtTrainingSet, NetworkFields
from ..custom_logger import log
from ..discrete_time import DtProblem
from ..errors import ArgumentError
from ..metrics_io import SolutionGrid
from ..network import MLPConfig, forward
from ..objective import LossTerm
from ..refsolve import burgers_exact_grid, cached_reference
from ..sampler import BoxDomain, Rng, lhs, sample_initial_boundary
from ..tableau import ButcherTableau
from .operators import BURGERS_NU, burgers_operator, burgers_residual

REFERENCE_DEFAULTS = {"t_final": 0.99, "t_points": 100, "x_points": 256}


def burgers_reference(cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
    """Cole–Hopf solution on the uniform (t, x) evaluation grid."""
    merged = {**REFERENCE_DEFAULTS, **(settings or {})}
    unknown = set(merged) - set(REFERENCE_DEFAULTS)
    if unknown:
        raise ArgumentError(f"unknown Burgers reference settings: {sorted(unknown)}")
    t_grid = np.linspace(0.0, float(merged["t_final"]), int(merged["t_points"]))
    x_grid = np.linspace(-1.0, 1.0, int(merged["x_points"]))
    return cached_reference(
        cache_directory,
        "burgers-exact",
        {**merged, "nu": BURGERS_NU},
        lambda: burgers_exact_grid(t_grid, x_grid, BURGERS_NU),
    )


def grid_values(grid: SolutionGrid, component: str, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values of `component` at points that lie exactly on the grid nodes."""
    rows = np.searchsorted(grid.t, t)
    cols = np.searchsorted(grid.x, x)
    rows = np.clip(rows, 0, grid.t.size - 1)
    cols = np.clip(cols, 0, grid.x.size - 1)
    if not (np.array_equal(grid.t[rows], t) and np.array_equal(grid.x[cols], x)):
        raise ArgumentError("points do not lie on the reference grid")
    return grid.values[component][rows, cols]


class BurgersCt(CtProblem):
    """Continuous-time Burgers: MSE_u on initial/boundary data plus MSE_f on collocation points."""

    snapshot_times = (0.25, 0.5, 0.75)

    @property
    def problem_id(self) -> str:
        return "burgers-ct"

    def __init__(self, network: MLPConfig, ic_fraction: float = 0.5) -> None:
        super().__init__(network, BoxDomain((0.0, -1.0), (1.0, 1.0)), BoundaryKind.DIRICHLET_ZERO)
        self.ic_fraction = ic_fraction

    def residuals(self, fields: NetworkFields) -> List[Variable]:
        return [burgers_residual(fields.u[0], fields.u_t[0], fields.u_x[0], fields.u_xx[0])]

    def loss_terms(self, data: CtTrainingSet) -> List[LossTerm]:
        if data.t_u.size == 0 and data.t_f.size == 0:
            raise ArgumentError("Burgers needs at least one data or collocation point")
        network = self.network

        def data_misfit(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            d = forward(network, params, [lanes["t"], lanes["x"]], graph)[0] - lanes["u"]
            return graph.linear([(d, d)])

        return [
            LossTerm("mse_u", {"t": data.t_u, "x": data.x_u, "u": data.u[:, 0]}, data_misfit),
            self.residual_term("mse_f", data.t_f, data.x_f),
        ]

    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        return burgers_reference(cache_directory, settings)

    def sample_training_set(
        self, reference: SolutionGrid, rng: Rng, counts: Mapping[str, int], noise: float = 0.0
    ) -> CtTrainingSet:
        """
        N_u points from the initial and boundary lines of the reference grid (u taken
        from the reference), N_f collocation points by Latin hypercube over the domain.
        """
        n_u = int(counts.get("n_u", 0))
        n_f = int(counts.get("n_f", 0))
        points = sample_initial_boundary(reference.t, reference.x, n_u, rng, self.ic_fraction)
        values = grid_values(reference, "u", points[:, 0], points[:, 1])
        if noise > 0.0 and n_u > 0:
            values = values + noise * np.std(values) * rng.derive(3).normal(size=n_u)
        collocation = lhs(self.domain, n_f, rng.derive(2)) if n_f else np.zeros((0, 2))
        log.debug(f"Sampled Burgers training set: N_u={n_u}, N_f={n_f}, noise={noise}")
        return CtTrainingSet(
            t_u=points[:, 0],
            x_u=points[:, 1],
            u=values[:, None],
            t_f=collocation[:, 0],
            x_f=collocation[:, 1],
        )


class BurgersDt(DtProblem):
    """Discrete-time Burgers with zero Dirichlet conditions on all q + 1 outputs."""

    @property
    def problem_id(self) -> str:
        return "burgers-dt"

    def __init__(self, network: MLPConfig, tableau: ButcherTableau, dt: float = 0.8, t_start: float = 0.1) -> None:
        super().__init__(network, tableau, dt, BoundaryKind.DIRICHLET_ZERO, t_start)

    def operator(self, u, u_x, u_xx):
        return burgers_operator(u, u_x, u_xx)

    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        return burgers_reference(cache_directory, settings)
