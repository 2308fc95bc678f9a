# src/continuous_time.py

"""
Continuous-Time Models
----------------------
Physics-informed networks u(t, x) trained on initial/boundary data plus the
PDE residual at collocation points. Concrete problems live in `src/problems`.
"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .autodiff import Graph, Variable
from .custom_logger import log
from .metrics_io import SolutionGrid
from .network import MLPConfig, forward, forward_array, init_params
from .objective import DEFAULT_CHUNK_SIZE, LossFunction, LossTerm
from .optimizer import LBFGSConfig, OptimizeReport, minimize
from .sampler import BoxDomain, Rng


class BoundaryKind(str, Enum):
    DIRICHLET_ZERO = "dirichlet_zero"
    PERIODIC = "periodic_with_derivative"


def _empty() -> np.ndarray:
    return np.zeros(0)


@dataclass
class CtTrainingSet:
    """
    Training points of a continuous-time model. Unused groups stay empty.

    Attributes:
        t_u, x_u, u: Initial/boundary data points and values, u of shape (N_u, outputs).
        t_f, x_f: Collocation points.
        x_0, h_0: Initial points and values, h_0 of shape (N_0, outputs).
        t_b: Boundary times.
    """

    t_u: np.ndarray = field(default_factory=_empty)
    x_u: np.ndarray = field(default_factory=_empty)
    u: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    t_f: np.ndarray = field(default_factory=_empty)
    x_f: np.ndarray = field(default_factory=_empty)
    x_0: np.ndarray = field(default_factory=_empty)
    h_0: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    t_b: np.ndarray = field(default_factory=_empty)

    def __post_init__(self) -> None:
        for name in ("t_u", "x_u", "t_f", "x_f", "x_0", "t_b"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64).reshape(-1))
        self.u = np.asarray(self.u, dtype=np.float64).reshape(self.t_u.size, -1)
        self.h_0 = np.asarray(self.h_0, dtype=np.float64).reshape(self.x_0.size, -1)

    @property
    def counts(self) -> Dict[str, int]:
        return {
            "n_u": self.t_u.size,
            "n_f": self.t_f.size,
            "n_0": self.x_0.size,
            "n_b": self.t_b.size,
        }

    def duplicated(self) -> "CtTrainingSet":
        """Every point twice (used to check mean semantics)."""
        return CtTrainingSet(
            t_u=np.tile(self.t_u, 2),
            x_u=np.tile(self.x_u, 2),
            u=np.vstack([self.u, self.u]),
            t_f=np.tile(self.t_f, 2),
            x_f=np.tile(self.x_f, 2),
            x_0=np.tile(self.x_0, 2),
            h_0=np.vstack([self.h_0, self.h_0]),
            t_b=np.tile(self.t_b, 2),
        )


@dataclass
class NetworkFields:
    """Network outputs and their input derivatives, one entry per output channel."""

    u: List[Variable]
    u_t: List[Variable]
    u_x: List[Variable]
    u_xx: List[Variable]


def network_fields(
    network: MLPConfig, params: Sequence[Variable], graph: Graph, t: Variable, x: Variable
) -> NetworkFields:
    """Builds u(t, x) and u_t, u_x, u_xx for every output channel."""
    outputs = forward(network, params, [t, x], graph)
    u_t = graph.jvp(outputs, t)
    u_x = graph.jvp(outputs, x)
    u_xx = graph.jvp(u_x, x)
    return NetworkFields(outputs, u_t, u_x, u_xx)


class CtProblem(ABC):
    """
    Abstract base class for continuous-time benchmark problems.
    """

    components: Tuple[str, ...] = ("u",)
    headline_component: str = "u"
    snapshot_times: Tuple[float, ...] = ()

    @property
    @abstractmethod
    def problem_id(self) -> str:
        """
        Identifier used in configs and summaries (e.g. "burgers-ct").
        Must be overridden in subclasses.
        """
        pass

    def __init__(self, network: MLPConfig, domain: BoxDomain, boundary: BoundaryKind) -> None:
        self.network = network
        self.domain = domain
        self.boundary = boundary

    @abstractmethod
    def residuals(self, fields: NetworkFields) -> List[Variable]:
        """PDE residual components built from the network fields."""
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def loss_terms(self, data: CtTrainingSet) -> List[LossTerm]:
        """
        Loss terms for a training set.

        Raises:
            ArgumentError: A required term has no points.
        """
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        """Reference solution on the evaluation grid."""
        raise NotImplementedError("Subclasses must implement this method")

    @abstractmethod
    def sample_training_set(
        self, reference: SolutionGrid, rng: Rng, counts: Mapping[str, int], noise: float = 0.0
    ) -> CtTrainingSet:
        raise NotImplementedError("Subclasses must implement this method")

    def derived_components(self, values: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        """Extra plotted quantities computed from the raw outputs."""
        return values

    def rel_l2(self, grid: SolutionGrid) -> Dict[str, float]:
        """Relative L2 errors on the full grid; key "rel_l2" is the headline number."""
        return {"rel_l2": grid.rel_l2(self.headline_component)}

    def snapshot_errors(self, grid: SolutionGrid) -> Dict[str, float]:
        """Headline-component error on the grid rows nearest to `snapshot_times`, keyed by time."""
        return {
            f"{t:.2f}": grid.rel_l2(self.headline_component, grid.nearest_time_index(t)) for t in self.snapshot_times
        }

    def residual_term(self, name: str, t: np.ndarray, x: np.ndarray) -> LossTerm:
        """Mean of the summed squared residual components over collocation points."""
        network = self.network

        def build(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            fields = network_fields(network, params, graph, lanes["t"], lanes["x"])
            return graph.linear([(f, f) for f in self.residuals(fields)])

        return LossTerm(name, {"t": t, "x": x}, build)


def ct_loss(
    problem: CtProblem,
    params: np.ndarray,
    data: CtTrainingSet,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Tuple[float, np.ndarray]:
    """Loss value and parameter gradient of `problem` on `data`."""
    with LossFunction(problem.network, problem.loss_terms(data), workers, chunk_size) as loss:
        return loss(params)


def train_ct(
    problem: CtProblem,
    data: CtTrainingSet,
    seed: int,
    lbfgs: Optional[LBFGSConfig] = None,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Tuple[np.ndarray, OptimizeReport]:
    """
    Initializes the network from `seed` and minimizes the problem loss with L-BFGS.

    Returns:
        Tuple[np.ndarray, OptimizeReport]: Trained parameters and the optimizer report.
    """
    x0 = init_params(problem.network, seed)
    counts = ", ".join(f"{k}={v}" for k, v in data.counts.items() if v)
    log.info(
        f"Training {problem.problem_id} ({problem.network.describe()}, "
        f"{problem.network.parameter_count} parameters, {counts})"
    )
    started = time.perf_counter()
    with LossFunction(problem.network, problem.loss_terms(data), workers, chunk_size) as loss:
        report = minimize(loss, x0, lbfgs)
        breakdown = loss.evaluate(report.params).terms
    log.info(
        f"{problem.problem_id}: loss {report.objective:.4e} after {report.iterations} iterations "
        f"({report.reason.value}, {time.perf_counter() - started:.1f}s)"
    )
    log.debug("Loss breakdown: " + ", ".join(f"{k}={v:.3e}" for k, v in breakdown.items()))
    return report.params, report


def predict_grid(
    problem: CtProblem, params: np.ndarray, t_grid: np.ndarray, x_grid: np.ndarray
) -> SolutionGrid:
    """Evaluates the trained network on the tensor grid t_grid × x_grid."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    x_grid = np.asarray(x_grid, dtype=np.float64)
    tt, xx = np.meshgrid(t_grid, x_grid, indexing="ij")
    outputs = forward_array(problem.network, params, np.column_stack([tt.ravel(), xx.ravel()]))
    values = {
        name: outputs[:, k].reshape(t_grid.size, x_grid.size)
        for k, name in enumerate(problem.components)
    }
    return SolutionGrid(t=t_grid, x=x_grid, values=problem.derived_components(values))
