# src/sweep.py

"""
Parameter Sweeps
----------------
Cartesian-product runs over a base configuration. Cell k runs with seed
base_seed + k, every finished (or failed) cell is appended to the results
ledger, and the collected rows are rendered as a rich Table and written as
Markdown and CSV.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from rich.console import Console
from rich.table import Table

from .config_manager import RunConfig
from .custom_logger import deep_merge, log
from .errors import ConfigError
from .helpers import atomic_write_text
from .metrics_io import RunSummary, append_to_ledger
from .pipeline import RunResult, run_pipeline

AXES: Dict[str, Tuple[str, str, type]] = {
    "n_u": ("data", "n_u", int),
    "n_f": ("data", "n_f", int),
    "layers": ("network", "hidden_layers", int),
    "neurons": ("network", "hidden_width", int),
    "q": ("stepping", "q", int),
    "dt": ("stepping", "dt", float),
}

Axis = Tuple[str, List[Any]]
Runner = Callable[[RunConfig, bool, Optional[str]], RunResult]


def parse_axis(text: str) -> Axis:
    """
    Parses `NAME=v1,v2,...`.

    Raises:
        ConfigError: Unknown axis name, empty or malformed value list.
    """
    name, sep, values = text.partition("=")
    name = name.strip()
    if not sep or name not in AXES:
        raise ConfigError(f"axis must look like NAME=v1,v2 with NAME in {sorted(AXES)}, got '{text}'")
    kind = AXES[name][2]
    try:
        parsed = [kind(v.strip()) for v in values.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"bad value in axis '{text}': {e}") from e
    if not parsed:
        raise ConfigError(f"axis '{name}' has no values")
    return name, parsed


@dataclass
class SweepCell:
    index: int
    values: Dict[str, Any]

    @property
    def label(self) -> str:
        return "_".join(f"{name}{value}" for name, value in self.values.items())


def expand_cells(axes: Sequence[Axis]) -> List[SweepCell]:
    names = [name for name, _ in axes]
    return [
        SweepCell(index, dict(zip(names, combination)))
        for index, combination in enumerate(itertools.product(*(values for _, values in axes)))
    ]


def cell_config(base: RunConfig, cell: SweepCell) -> RunConfig:
    """The base configuration with the cell's axis values and seed base.seed + cell.index."""
    override: Dict[str, Any] = {"seed": base.seed + cell.index}
    for name, value in cell.values.items():
        section, key, _ = AXES[name]
        override.setdefault(section, {})[key] = value
    return RunConfig.from_dict(deep_merge(base.to_dict(), override))


def _failed_summary(base: RunConfig, cell: SweepCell, error: Exception) -> RunSummary:
    network = dict(base.to_dict()["network"])
    for name, value in cell.values.items():
        section, key, _ = AXES[name]
        if section == "network":
            network[key] = value
    return RunSummary(
        problem=base.problem,
        seed=base.seed + cell.index,
        architecture="",
        hidden_layers=max(0, int(network["hidden_layers"])),
        hidden_width=max(0, int(network["hidden_width"])),
        status="failed",
        message=f"{type(error).__name__}: {error}",
    )


def run_sweep(
    base: RunConfig,
    axes: Sequence[Axis],
    ledger_path: Union[str, Path],
    workers: int = 1,
    runner: Runner = run_pipeline,
) -> List[Tuple[SweepCell, RunSummary]]:
    """
    Runs every cell of the product of `axes`; failures are recorded and the sweep continues.

    Returns:
        List[Tuple[SweepCell, RunSummary]]: One entry per cell, in cell order.
    """
    cells = expand_cells(axes)
    log.info(f"Sweeping {base.problem}: {len(cells)} cells over {', '.join(name for name, _ in axes)}")

    def run(cell: SweepCell) -> RunSummary:
        try:
            config = cell_config(base, cell)
            summary = runner(config, True, f"sweep-{cell.index:03d}-{cell.label}").summary
        except Exception as e:
            log.error(f"Sweep cell {cell.index} ({cell.values}) failed: {e}")
            summary = _failed_summary(base, cell, e)
        append_to_ledger(ledger_path, summary)
        return summary

    with ThreadPoolExecutor(max_workers=max(1, workers), thread_name_prefix="sweep") as executor:
        summaries = list(executor.map(run, cells))
    failed = sum(1 for s in summaries if s.status != "ok")
    log.info(f"Sweep finished: {len(cells) - failed} ok, {failed} failed")
    return list(zip(cells, summaries))


def _error_text(summary: RunSummary) -> str:
    if summary.status != "ok" or summary.rel_l2 is None:
        return "failed"
    return f"{summary.rel_l2:.1e}"


def table_rows(axes: Sequence[Axis], results: Sequence[Tuple[SweepCell, RunSummary]]) -> List[List[str]]:
    """Long-form rows: axis values, seed, relative L2, iterations, status."""
    return [
        [str(cell.values[name]) for name, _ in axes]
        + [str(summary.seed), _error_text(summary), str(summary.iterations), summary.status]
        for cell, summary in results
    ]


def table_header(axes: Sequence[Axis]) -> List[str]:
    return [name for name, _ in axes] + ["seed", "rel_l2", "iterations", "status"]


def markdown_table(axes: Sequence[Axis], results: Sequence[Tuple[SweepCell, RunSummary]]) -> str:
    """
    Markdown rendering. Two axes give a grid (first axis down, second across),
    otherwise one row per cell.
    """
    if len(axes) == 2:
        (row_name, row_values), (col_name, col_values) = axes
        errors = {(c.values[row_name], c.values[col_name]): _error_text(s) for c, s in results}
        lines = [
            "| " + " | ".join([f"{row_name} \\ {col_name}"] + [str(v) for v in col_values]) + " |",
            "|" + "---|" * (len(col_values) + 1),
        ]
        for r in row_values:
            lines.append("| " + " | ".join([str(r)] + [errors[(r, c)] for c in col_values]) + " |")
        return "\n".join(lines) + "\n"
    header = table_header(axes)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(row) + " |" for row in table_rows(axes, results)]
    return "\n".join(lines) + "\n"


def write_tables(
    directory: Union[str, Path], axes: Sequence[Axis], results: Sequence[Tuple[SweepCell, RunSummary]]
) -> Tuple[Path, Path]:
    directory = Path(directory)
    csv_lines = [",".join(table_header(axes))] + [",".join(row) for row in table_rows(axes, results)]
    csv_path = atomic_write_text(directory / "sweep.csv", "\n".join(csv_lines) + "\n")
    md_path = atomic_write_text(directory / "sweep.md", markdown_table(axes, results))
    return csv_path, md_path


def display_sweep(axes: Sequence[Axis], results: Sequence[Tuple[SweepCell, RunSummary]], title: str) -> None:
    console = Console(stderr=True)
    table = Table(title=title)
    styles = ["cyan"] * len(axes) + ["white", "magenta", "green", "yellow"]
    for name, style in zip(table_header(axes), styles):
        table.add_column(name, style=style)
    for row in table_rows(axes, results):
        table.add_row(*row)
    console.print(table)
