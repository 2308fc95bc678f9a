# src/metrics_io.py

"""
Metrics and result files.

Grid CSV: header `t,x,<component>...[,<component>_exact...]`, one row per
(t, x) pair in t-major order, reals in %.17g.

Run summaries are YAML mappings with the fields of `RunSummary`; a results
ledger is a YAML stream of such documents, appended under an exclusive lock.
"""

import fcntl
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Union

import numpy as np
import yaml

from .custom_logger import log
from .errors import ArgumentError, ParseError
from .helpers import atomic_write_text, format_real

EXACT_SUFFIX = "_exact"


@dataclass
class SolutionGrid:
    """Values on a (t, x) tensor grid; arrays have shape (len(t), len(x))."""

    t: np.ndarray
    x: np.ndarray
    values: Dict[str, np.ndarray]
    reference: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        self.x = np.asarray(self.x, dtype=np.float64).reshape(-1)
        for grid_name, grid in (("t", self.t), ("x", self.x)):
            if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
                raise ArgumentError(f"{grid_name}-grid must be strictly ascending")
        shape = (self.t.size, self.x.size)
        for name, array in list(self.values.items()) + list(self.reference.items()):
            if np.shape(array) != shape:
                raise ArgumentError(f"component '{name}' has shape {np.shape(array)}, expected {shape}")

    @property
    def components(self) -> List[str]:
        return list(self.values)

    def rel_l2(self, component: str, time_index: Optional[int] = None) -> float:
        """Relative L2 error of a component against its reference (whole grid or one snapshot)."""
        if component not in self.reference:
            raise ArgumentError(f"no reference values for '{component}'")
        pred, exact = self.values[component], self.reference[component]
        if time_index is not None:
            pred, exact = pred[time_index], exact[time_index]
        return rel_l2(pred, exact)

    def nearest_time_index(self, t: float) -> int:
        """Row of the t-grid closest to `t`."""
        return int(np.argmin(np.abs(self.t - t)))


def rel_l2(pred: np.ndarray, exact: np.ndarray) -> float:
    """‖pred − exact‖₂ / ‖exact‖₂ over all entries."""
    pred = np.asarray(pred, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    if pred.shape != exact.shape:
        raise ArgumentError(f"shape mismatch: {pred.shape} vs {exact.shape}")
    norm = np.linalg.norm(exact.ravel())
    if norm == 0.0:
        raise ArgumentError("reference has zero norm")
    return float(np.linalg.norm((pred - exact).ravel()) / norm)


def write_grid(path: Union[str, Path], grid: SolutionGrid) -> Path:
    names = grid.components + [f"{name}{EXACT_SUFFIX}" for name in grid.reference]
    columns = [grid.values[name] for name in grid.components] + list(grid.reference.values())
    lines = [",".join(["t", "x"] + names)]
    for i, t in enumerate(grid.t):
        t_text = format_real(t)
        for j, x in enumerate(grid.x):
            row = [t_text, format_real(x)] + [format_real(column[i, j]) for column in columns]
            lines.append(",".join(row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_grid(path: Union[str, Path]) -> SolutionGrid:
    """
    Parses a grid CSV.

    Raises:
        ParseError: Malformed header or row, or rows that do not form a t-major tensor grid.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty grid file", 1)
    header = lines[0].split(",")
    if header[:2] != ["t", "x"] or len(header) < 3:
        raise ParseError("header must start with 't,x' followed by components", 1)
    names = header[2:]
    rows = np.empty((len(lines) - 1, len(header)))
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}", number)
        try:
            rows[number - 2] = [float(cell) for cell in cells]
        except ValueError as e:
            raise ParseError(f"not a real number: {e}", number) from e
    if rows.shape[0] == 0:
        raise ParseError("grid has no data rows", 1)

    t_grid = np.unique(rows[:, 0])
    x_grid = rows[: np.searchsorted(rows[:, 0], rows[0, 0], side="right"), 1]
    if x_grid.size * t_grid.size != rows.shape[0]:
        raise ParseError("rows do not form a full (t, x) grid", len(lines))
    expected_t = np.repeat(t_grid, x_grid.size)
    expected_x = np.tile(x_grid, t_grid.size)
    mismatch = np.nonzero((rows[:, 0] != expected_t) | (rows[:, 1] != expected_x))[0]
    if mismatch.size:
        raise ParseError("rows are not in t-major grid order", int(mismatch[0]) + 2)

    values, reference = {}, {}
    for offset, name in enumerate(names):
        array = rows[:, 2 + offset].reshape(t_grid.size, x_grid.size)
        if name.endswith(EXACT_SUFFIX) and name[: -len(EXACT_SUFFIX)] in names:
            reference[name[: -len(EXACT_SUFFIX)]] = array
        else:
            values[name] = array
    try:
        return SolutionGrid(t=t_grid, x=x_grid, values=values, reference=reference)
    except ArgumentError as e:
        raise ParseError(str(e), 1) from e


@dataclass
class RunSummary:
    problem: str
    seed: int
    architecture: str
    hidden_layers: int
    hidden_width: int
    n_u: int = 0
    n_f: int = 0
    n_0: int = 0
    n_b: int = 0
    n_n: int = 0
    q: int = 0
    dt: float = 0.0
    rel_l2: Optional[float] = None
    rel_l2_uv: Optional[float] = None
    final_loss: Optional[float] = None
    iterations: int = 0
    wall_time_seconds: float = 0.0
    termination: str = ""
    status: str = "ok"
    message: str = ""
    layers_counted: str = "hidden"
    snapshot_errors: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("dt", "wall_time_seconds", "rel_l2", "rel_l2_uv", "final_loss"):
            if getattr(self, name) is not None:
                setattr(self, name, float(getattr(self, name)))
        for name in ("seed", "hidden_layers", "hidden_width", "n_u", "n_f", "n_0", "n_b", "n_n", "q", "iterations"):
            setattr(self, name, int(getattr(self, name)))
            if getattr(self, name) < 0:
                raise ArgumentError(f"{name} must be >= 0")
        if self.rel_l2 is not None and self.rel_l2 < 0:
            raise ArgumentError("rel_l2 must be >= 0")
        self.snapshot_errors = {str(t): float(e) for t, e in (self.snapshot_errors or {}).items()}

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "RunSummary":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown summary fields: {sorted(unknown)}")
        return cls(**data)


def summary_text(summary: RunSummary) -> str:
    return yaml.safe_dump(summary.to_dict(), sort_keys=False, default_flow_style=False)


def write_summary(path: Union[str, Path], summary: RunSummary) -> Path:
    return atomic_write_text(path, summary_text(summary))


def read_summary(path: Union[str, Path]) -> RunSummary:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        line = getattr(getattr(e, "problem_mark", None), "line", None)
        raise ParseError(f"invalid summary YAML: {e}", None if line is None else line + 1) from e
    if not isinstance(data, dict):
        raise ParseError("summary must be a YAML mapping", 1)
    return RunSummary.from_dict(data)


def append_to_ledger(path: Union[str, Path], summary: RunSummary) -> None:
    """Appends one summary document to a YAML-stream ledger under an exclusive lock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = "---\n" + summary_text(summary)
    with path.open("a", encoding="utf-8") as handle:
        fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
        try:
            handle.write(document)
            handle.flush()
        finally:
            fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
    log.debug(f"Appended {summary.problem} (seed {summary.seed}) to {path}")


def read_ledger(path: Union[str, Path]) -> List[RunSummary]:
    path = Path(path)
    if not path.exists():
        return []
    with path.open("r", encoding="utf-8") as handle:
        fcntl.flock(handle.fileno(), fcntl.LOCK_SH)
        try:
            text = handle.read()
        finally:
            fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
    return [RunSummary.from_dict(doc) for doc in _documents(text)]


def _documents(text: str) -> Iterator[dict]:
    try:
        for document in yaml.safe_load_all(text):
            if document is not None:
                yield document
    except yaml.YAMLError as e:
        raise ParseError(f"invalid ledger YAML: {e}") from e
