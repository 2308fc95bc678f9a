# src/discrete_time.py

"""
Discrete-Time Models
--------------------
One network x ↦ [u^{n+c_1}, ..., u^{n+c_q}, u^{n+1}] constrained by a q-stage
implicit Runge–Kutta step. Every output is mapped back to the data time t^n:

    u^n_i     = u^{n+c_i} + Δt Σ_j a_ij N[u^{n+c_j}]     (i = 1..q)
    u^n_{q+1} = u^{n+1}   + Δt Σ_j b_j  N[u^{n+c_j}]

and all q + 1 reconstructions are fitted to the snapshot at t^n.
"""

import copy
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .autodiff import Graph, Variable
from .continuous_time import BoundaryKind
from .custom_logger import log
from .errors import ArgumentError, StructuralError
from .metrics_io import SolutionGrid
from .network import MLPConfig, forward, forward_array, init_params
from .objective import DEFAULT_CHUNK_SIZE, LossFunction, LossTerm
from .optimizer import LBFGSConfig, OptimizeReport, minimize
from .sampler import Rng, subsample_indices
from .tableau import ButcherTableau


def temporal_error_log10(dt: float, q: int) -> float:
    """log10 of Δt^{2q}, the temporal error scale of a q-stage Gauss step (no underflow)."""
    if not dt > 0.0:
        raise ArgumentError(f"dt must be positive, got {dt}")
    return 2 * q * math.log10(dt)


@dataclass
class DtSnapshot:
    x: np.ndarray
    u: np.ndarray
    t: float

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=np.float64).reshape(-1)
        self.u = np.asarray(self.u, dtype=np.float64).reshape(-1)
        if self.x.size != self.u.size:
            raise ArgumentError(f"snapshot has {self.x.size} points but {self.u.size} values")

    @property
    def size(self) -> int:
        return self.x.size

    def duplicated(self) -> "DtSnapshot":
        return DtSnapshot(np.tile(self.x, 2), np.tile(self.u, 2), self.t)


class DtProblem(ABC):
    """
    Abstract base class for discrete-time benchmark problems.
    """

    x_range: Tuple[float, float] = (-1.0, 1.0)

    @property
    @abstractmethod
    def problem_id(self) -> str:
        """
        Identifier used in configs and summaries (e.g. "burgers-dt").
        Must be overridden in subclasses.
        """
        pass

    def __init__(
        self,
        network: MLPConfig,
        tableau: ButcherTableau,
        dt: float,
        boundary: BoundaryKind,
        t_start: float,
    ) -> None:
        if network.input_dim != 1:
            raise StructuralError(f"stage network takes one input, config has {network.input_dim}")
        if network.output_dim != tableau.q + 1:
            raise StructuralError(
                f"stage network needs q + 1 = {tableau.q + 1} outputs, config has {network.output_dim}"
            )
        if dt < 0.0:
            raise ArgumentError(f"dt must be >= 0, got {dt}")
        self.network = network
        self.tableau = tableau
        self.dt = float(dt)
        self.boundary = boundary
        self.t_start = float(t_start)

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt

    def starting_at(self, t_start: float) -> "DtProblem":
        """A copy of this problem whose step starts at `t_start`; `self` is left untouched."""
        step = copy.copy(self)
        step.t_start = float(t_start)
        return step

    @abstractmethod
    def operator(self, u, u_x, u_xx):
        """Spatial operator N[u] of u_t + N[u] = 0."""
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        """Reference solution containing the rows t_start and t_end."""
        raise NotImplementedError("Subclasses must implement this method")

    def time_index(self, reference: SolutionGrid, t: float) -> int:
        index = reference.nearest_time_index(t)
        if not math.isclose(reference.t[index], t, rel_tol=0.0, abs_tol=1e-9):
            raise ArgumentError(f"reference grid has no snapshot at t={t}")
        return index

    def sample_snapshot(
        self, reference: SolutionGrid, n: int, rng: Rng, noise: float = 0.0
    ) -> DtSnapshot:
        """N_n points of the reference row at t_start, with optional Gaussian noise."""
        if n < 1:
            raise ArgumentError("the snapshot needs at least one point")
        row = reference.values["u"][self.time_index(reference, self.t_start)]
        indices = subsample_indices(reference.x.size, n, rng)
        values = row[indices].copy()
        if noise > 0.0:
            values += noise * np.std(values) * rng.normal(size=n)
        return DtSnapshot(reference.x[indices], values, self.t_start)


def stage_outputs(problem: DtProblem, params: Sequence[Variable], x: Variable) -> List[Variable]:
    """The q stage values followed by u^{n+1}."""
    return forward(problem.network, params, [x], x.graph)


def irk_reconstruction(
    graph: Graph,
    tableau: ButcherTableau,
    dt: float,
    outputs: Sequence[Variable],
    operators: Sequence[Variable],
) -> List[Variable]:
    """Maps the q + 1 outputs back to t^n using the stage operator values."""
    q = tableau.q
    reconstructed = [
        graph.linear([(operators[j], dt * tableau.a[i, j]) for j in range(q)], [outputs[i]])
        for i in range(q)
    ]
    reconstructed.append(
        graph.linear([(operators[j], dt * tableau.b[j]) for j in range(q)], [outputs[q]])
    )
    return reconstructed


def dt_residuals(problem: DtProblem, params: Sequence[Variable], x: Variable) -> List[Variable]:
    """
    The q + 1 reconstructions u^n_i at x; each should equal the snapshot value.
    """
    graph = x.graph
    outputs = stage_outputs(problem, params, x)
    q = problem.tableau.q
    stages = outputs[:q]
    u_x = graph.jvp(stages, x)
    u_xx = graph.jvp(u_x, x)
    operators = [problem.operator(u, ux, uxx) for u, ux, uxx in zip(stages, u_x, u_xx)]
    return irk_reconstruction(graph, problem.tableau, problem.dt, outputs, operators)


def loss_terms(problem: DtProblem, snapshot: DtSnapshot) -> List[LossTerm]:
    """SSE_n on the snapshot plus SSE_b for the boundary kind (both sums)."""
    if snapshot.size == 0:
        raise ArgumentError("the snapshot is empty")

    def data_misfit(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
        misfits = [r - lanes["u"] for r in dt_residuals(problem, params, lanes["x"])]
        return graph.linear([(m, m) for m in misfits])

    terms = [LossTerm("sse_n", {"x": snapshot.x, "u": snapshot.u}, data_misfit, reduction="sum")]
    lo, hi = problem.x_range
    if problem.boundary == BoundaryKind.DIRICHLET_ZERO:

        def boundary_values(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            outputs = stage_outputs(problem, params, lanes["x"])
            return graph.linear([(o, o) for o in outputs])

        terms.append(LossTerm("sse_b", {"x": [lo, hi]}, boundary_values, reduction="sum"))
    else:

        def periodic_mismatch(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            left = stage_outputs(problem, params, lanes["x_lo"])
            right = stage_outputs(problem, params, lanes["x_hi"])
            left_x = graph.jvp(left, lanes["x_lo"])
            right_x = graph.jvp(right, lanes["x_hi"])
            gaps = [a - b for a, b in zip(left, right)] + [a - b for a, b in zip(left_x, right_x)]
            return graph.linear([(g, g) for g in gaps])

        terms.append(
            LossTerm("sse_b", {"x_lo": [lo], "x_hi": [hi]}, periodic_mismatch, reduction="sum")
        )
    return terms


def dt_loss(
    problem: DtProblem,
    params: np.ndarray,
    snapshot: DtSnapshot,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Tuple[float, np.ndarray]:
    with LossFunction(problem.network, loss_terms(problem, snapshot), workers, chunk_size) as loss:
        return loss(params)


def train_dt(
    problem: DtProblem,
    snapshot: DtSnapshot,
    seed: int,
    lbfgs: Optional[LBFGSConfig] = None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Tuple[np.ndarray, OptimizeReport]:
    """
    Initializes the stage network from `seed` and minimizes SSE_n + SSE_b.

    Returns:
        Tuple[np.ndarray, OptimizeReport]: Trained parameters and the optimizer report.
    """
    x0 = init_params(problem.network, seed)
    log.info(
        f"Training {problem.problem_id} (q={problem.tableau.q}, dt={problem.dt}, "
        f"{problem.network.describe()}, N_n={snapshot.size})"
    )
    started = time.perf_counter()
    with LossFunction(problem.network, loss_terms(problem, snapshot), workers, chunk_size) as loss:
        report = minimize(loss, x0, lbfgs)
    log.info(
        f"{problem.problem_id}: loss {report.objective:.4e} after {report.iterations} iterations "
        f"({report.reason.value}, {time.perf_counter() - started:.1f}s)"
    )
    return report.params, report


def predict_step(problem: DtProblem, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """u^{n+1}(x): the last network output."""
    outputs = forward_array(problem.network, params, np.asarray(x, dtype=np.float64).reshape(-1, 1))
    return outputs[:, -1]


def predict_grid(problem: DtProblem, params: np.ndarray, x_grid: np.ndarray) -> SolutionGrid:
    """One-row grid holding the prediction at t^{n+1}."""
    x_grid = np.asarray(x_grid, dtype=np.float64)
    u = predict_step(problem, params, x_grid)
    return SolutionGrid(t=[problem.t_end], x=x_grid, values={"u": u[None, :]})


@dataclass
class MarchStep:
    params: np.ndarray
    report: OptimizeReport
    snapshot: DtSnapshot


def march(
    problem: DtProblem,
    snapshot: DtSnapshot,
    steps: int,
    seed: int,
    lbfgs: Optional[LBFGSConfig] = None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> List[MarchStep]:
    """
    Chains `steps` discrete-time steps: the prediction at t^{n+1} on the snapshot
    points becomes the data of the next step. Step k trains with seed + k.
    """
    history = []
    current = snapshot
    for k in range(steps):
        step = problem.starting_at(current.t)
        params, report = train_dt(step, current, seed + k, lbfgs, workers, chunk_size)
        history.append(MarchStep(params, report, current))
        current = DtSnapshot(current.x, predict_step(step, params, current.x), step.t_end)
    return history
