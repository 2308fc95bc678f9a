# src/pipeline.py

"""
Run Pipeline
------------
One benchmark run end to end: reference data → sampling → training →
prediction → metrics → files (grid CSV, summary YAML, network checkpoint).
"""

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .config_manager import RunConfig
from .continuous_time import CtProblem, predict_grid, train_ct
from .custom_logger import log
from .discrete_time import DtProblem, march, predict_step
from .metrics_io import RunSummary, SolutionGrid, write_grid, write_summary
from .network import MLPConfig, save_checkpoint
from .optimizer import OptimizeReport
from .problems import CT_PROBLEMS, DT_PROBLEMS, BurgersCt
from .sampler import Rng
from .tableau import load_or_generate

# Training data are drawn from Rng(seed + DATA_SEED_OFFSET); the network uses Rng(seed).
DATA_SEED_OFFSET = 1_000_003

GRID_FILE = "grid.csv"
SUMMARY_FILE = "summary.yaml"
CHECKPOINT_FILE = "checkpoint.txt"


@dataclass
class RunResult:
    summary: RunSummary
    grid: SolutionGrid
    params: np.ndarray
    directory: Optional[Path] = None


def run_directory(config: RunConfig, name: Optional[str] = None) -> Path:
    return Path(config.output_directory) / (name or f"{config.problem}-seed{config.seed}")


def build_problem(config: RunConfig) -> Union[CtProblem, DtProblem]:
    """Instantiates the problem class with the configured architecture (and tableau for DT)."""
    layers, width = config.network.hidden_layers, config.network.hidden_width
    if config.problem in CT_PROBLEMS:
        cls = CT_PROBLEMS[config.problem]
        network = MLPConfig(2, layers, width, len(cls.components))
        if cls is BurgersCt:
            return BurgersCt(network, ic_fraction=config.data.ic_fraction)
        return cls(network)
    stepping = config.stepping
    tableau = load_or_generate(stepping.q, stepping.precision_bits, config.cache_directory)
    network = MLPConfig(1, layers, width, stepping.q + 1)
    return DT_PROBLEMS[config.problem](network, tableau, stepping.dt, stepping.t_start)


def _run_ct(config: RunConfig, problem: CtProblem) -> Tuple[np.ndarray, OptimizeReport, SolutionGrid, Dict[str, Any]]:
    reference = problem.reference(config.cache_directory, config.reference)
    rng = Rng(config.seed + DATA_SEED_OFFSET)
    data = problem.sample_training_set(reference, rng, config.data.counts(), config.data.noise)
    params, report = train_ct(problem, data, config.seed, config.optimizer, config.workers, config.chunk_size)
    grid = predict_grid(problem, params, reference.t, reference.x)
    grid.reference = {name: reference.values[name] for name in grid.values if name in reference.values}
    errors = problem.rel_l2(grid)
    errors["snapshots"] = problem.snapshot_errors(grid)
    return params, report, grid, errors


def _run_dt(config: RunConfig, problem: DtProblem) -> Tuple[np.ndarray, OptimizeReport, SolutionGrid, Dict[str, Any]]:
    reference = problem.reference(config.cache_directory, config.reference)
    steps = config.stepping.steps
    t_final = problem.t_start + steps * problem.dt
    final_row = reference.values["u"][problem.time_index(reference, t_final)]
    rng = Rng(config.seed + DATA_SEED_OFFSET)
    snapshot = problem.sample_snapshot(reference, config.data.n_n, rng, config.data.noise)
    history = march(problem, snapshot, steps, config.seed, config.optimizer, config.workers, config.chunk_size)
    last = history[-1]
    prediction = predict_step(problem, last.params, reference.x)
    grid = SolutionGrid(
        t=[t_final], x=reference.x, values={"u": prediction[None, :]}, reference={"u": final_row[None, :]}
    )
    report = last.report
    report.iterations = sum(step.report.iterations for step in history)
    return last.params, report, grid, {"rel_l2": grid.rel_l2("u")}


def run_pipeline(config: RunConfig, write_outputs: bool = True, name: Optional[str] = None) -> RunResult:
    """
    Executes one run.

    Args:
        config (RunConfig): Validated run configuration.
        write_outputs (bool): Write grid, summary and checkpoint under the run directory.
        name (Optional[str]): Run directory name; defaults to `<problem>-seed<seed>`.

    Returns:
        RunResult: Summary, prediction grid and trained parameters.

    Raises:
        NumericalError: Reference generation or tableau construction broke down.
    """
    started = time.perf_counter()
    problem = build_problem(config)
    log.info(f"Running {problem.problem_id} with seed {config.seed}")
    if isinstance(problem, CtProblem):
        params, report, grid, errors = _run_ct(config, problem)
    else:
        params, report, grid, errors = _run_dt(config, problem)
    elapsed = time.perf_counter() - started

    data = config.data
    summary = RunSummary(
        problem=config.problem,
        seed=config.seed,
        architecture=problem.network.describe(),
        hidden_layers=config.network.hidden_layers,
        hidden_width=config.network.hidden_width,
        n_u=data.n_u if config.problem == "burgers-ct" else 0,
        n_f=data.n_f if not config.discrete else 0,
        n_0=data.n_0 if config.problem == "nls-ct" else 0,
        n_b=data.n_b if config.problem == "nls-ct" else 0,
        n_n=data.n_n if config.discrete else 0,
        q=config.stepping.q if config.discrete else 0,
        dt=config.stepping.dt if config.discrete else 0.0,
        rel_l2=errors["rel_l2"],
        rel_l2_uv=errors.get("rel_l2_uv"),
        final_loss=report.objective,
        iterations=report.iterations,
        wall_time_seconds=round(elapsed, 3),
        termination=report.reason.value,
        snapshot_errors=errors.get("snapshots", {}),
    )
    log.info(f"{config.problem}: relative L2 error {summary.rel_l2:.4e} ({summary.termination})")
    for t, error in summary.snapshot_errors.items():
        log.info(f"{config.problem}: relative L2 error at t={t}: {error:.4e}")

    directory = None
    if write_outputs:
        directory = run_directory(config, name)
        write_grid(directory / GRID_FILE, grid)
        write_summary(directory / SUMMARY_FILE, summary)
        save_checkpoint(directory / CHECKPOINT_FILE, problem.network, params)
        log.info(f"Wrote results to {directory}")
    return RunResult(summary, grid, params, directory)
