# src/objective.py

"""
Objective Module
----------------
Loss assembly shared by the continuous- and discrete-time models.

A loss is a list of `LossTerm`s. Each term is one per-lane expression (for
example the squared PDE residual at a collocation point) evaluated over a table
of lane inputs and reduced by mean or sum. A term is compiled once per worker
thread into a Graph holding the expression, its lane total and the parameter
gradient of that total; every evaluation only rebinds parameters and lane
chunks.

Chunks are evaluated in a thread pool and reduced in a fixed order, so the
loss value and gradient are deterministic for any worker count.
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .autodiff import Graph, Variable
from .custom_logger import log
from .errors import ArgumentError, StructuralError
from .network import MLPConfig, register_params

ExpressionBuilder = Callable[[Graph, List[Variable], Dict[str, Variable]], Variable]

DEFAULT_CHUNK_SIZE = 2048


@dataclass
class LossTerm:
    """
    One additive loss term.

    Attributes:
        name (str): Label used in loss breakdowns (e.g. "mse_f").
        lanes (Dict[str, np.ndarray]): Equal-length input columns, one lane per row.
        build (ExpressionBuilder): Builds the per-lane expression from
            (graph, parameter variables, lane variables).
        reduction (str): "mean" divides the lane total by the lane count, "sum" does not.
    """

    name: str
    lanes: Dict[str, np.ndarray]
    build: ExpressionBuilder
    reduction: str = "mean"

    def __post_init__(self) -> None:
        if self.reduction not in ("mean", "sum"):
            raise ArgumentError(f"unknown reduction '{self.reduction}'")
        self.lanes = {k: np.asarray(v, dtype=np.float64).reshape(-1) for k, v in self.lanes.items()}
        sizes = {v.size for v in self.lanes.values()}
        if len(sizes) > 1:
            raise ArgumentError(f"lane columns of '{self.name}' differ in length: {sorted(sizes)}")

    @property
    def size(self) -> int:
        return next(iter(self.lanes.values())).size if self.lanes else 0


class CompiledTerm:
    """A LossTerm built on its own Graph: expression, lane total and parameter gradient."""

    def __init__(self, term: LossTerm, network: MLPConfig) -> None:
        graph = Graph()
        self.graph = graph
        self.params = register_params(graph, network)
        self.lanes = {name: graph.variable(name, batched=True) for name in term.lanes}
        self.expression = term.build(graph, self.params, self.lanes)
        if not self.expression.batched:
            raise StructuralError(f"loss term '{term.name}' does not depend on its lanes")
        self.total = graph.batch_sum(self.expression)
        self.gradient = graph.grad(self.total, self.params)
        log.debug(f"Compiled loss term '{term.name}': {len(graph)} graph nodes")

    def evaluate(self, params: np.ndarray, lanes: Dict[str, np.ndarray]) -> Tuple[float, np.ndarray]:
        self.graph.assign(self.params, params)
        self.graph.eval({self.lanes[name]: column for name, column in lanes.items()})
        gradient = np.fromiter((g.value for g in self.gradient), dtype=np.float64, count=len(self.gradient))
        return float(self.total.value), gradient

    def lane_values(self, params: np.ndarray, lanes: Dict[str, np.ndarray]) -> np.ndarray:
        self.graph.assign(self.params, params)
        self.graph.eval({self.lanes[name]: column for name, column in lanes.items()})
        return np.asarray(self.expression.value, dtype=np.float64)


@dataclass
class LossEvaluation:
    value: float
    gradient: np.ndarray
    terms: Dict[str, float] = field(default_factory=dict)


class LossFunction:
    """
    Callable objective params -> (value, gradient) over a fixed set of loss terms.

    Args:
        network (MLPConfig): Architecture whose flat parameter vector is optimized.
        terms (List[LossTerm]): Loss terms; terms with no lanes contribute nothing.
        workers (int): Thread count for chunk evaluation.
        chunk_size (int): Maximum lanes per graph evaluation.
    """

    def __init__(
        self,
        network: MLPConfig,
        terms: List[LossTerm],
        workers: int = 1,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
    ) -> None:
        if chunk_size < 1:
            raise ArgumentError(f"chunk_size must be >= 1, got {chunk_size}")
        self.network = network
        self.terms = [term for term in terms if term.size > 0]
        self.workers = max(1, int(workers))
        self.chunk_size = int(chunk_size)
        self.evaluations = 0
        self._local = threading.local()
        self._executor: Optional[ThreadPoolExecutor] = None
        for term in terms:
            if term.size == 0:
                log.debug(f"Loss term '{term.name}' has no points and is left out")

    def __enter__(self) -> "LossFunction":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def _compiled(self, index: int) -> CompiledTerm:
        cache = getattr(self._local, "terms", None)
        if cache is None:
            cache = self._local.terms = {}
        if index not in cache:
            cache[index] = CompiledTerm(self.terms[index], self.network)
        return cache[index]

    def _chunks(self) -> List[Tuple[int, int, int]]:
        tasks = []
        for index, term in enumerate(self.terms):
            for start in range(0, term.size, self.chunk_size):
                tasks.append((index, start, min(start + self.chunk_size, term.size)))
        return tasks

    def evaluate(self, params: np.ndarray) -> LossEvaluation:
        params = np.asarray(params, dtype=np.float64)
        if params.size != self.network.parameter_count:
            raise StructuralError(
                f"expected {self.network.parameter_count} parameters, got {params.size}"
            )
        tasks = self._chunks()

        def run(task: Tuple[int, int, int]) -> Tuple[float, np.ndarray]:
            index, start, stop = task
            lanes = {name: column[start:stop] for name, column in self.terms[index].lanes.items()}
            return self._compiled(index).evaluate(params, lanes)

        if self.workers > 1 and len(tasks) > 1:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(
                    max_workers=self.workers, thread_name_prefix="loss"
                )
            results = list(self._executor.map(run, tasks))
        else:
            results = [run(task) for task in tasks]

        sums: Dict[int, Tuple[float, np.ndarray]] = {}
        for (index, _, _), (value, gradient) in zip(tasks, results):
            if index in sums:
                total, total_gradient = sums[index]
                sums[index] = (total + value, total_gradient + gradient)
            else:
                sums[index] = (value, gradient)

        value = 0.0
        gradient = np.zeros(self.network.parameter_count)
        breakdown: Dict[str, float] = {}
        for index, term in enumerate(self.terms):
            term_value, term_gradient = sums[index]
            if term.reduction == "mean":
                term_value /= term.size
                term_gradient = term_gradient / term.size
            breakdown[term.name] = term_value
            value += term_value
            gradient += term_gradient
        self.evaluations += 1
        return LossEvaluation(value, gradient, breakdown)

    def __call__(self, params: np.ndarray) -> Tuple[float, np.ndarray]:
        evaluation = self.evaluate(params)
        return evaluation.value, evaluation.gradient

    def lane_values(self, name: str, params: np.ndarray) -> np.ndarray:
        """Per-lane values of the expression of term `name` (before reduction)."""
        for index, term in enumerate(self.terms):
            if term.name == name:
                compiled = self._compiled(index)
                return np.concatenate(
                    [
                        compiled.lane_values(
                            params, {k: v[start:stop] for k, v in term.lanes.items()}
                        )
                        for chunk_term, start, stop in self._chunks()
                        if chunk_term == index
                    ]
                )
        raise ArgumentError(f"no loss term named '{name}'")
