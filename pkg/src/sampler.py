# src/sampler.py

"""
Sampler Module
--------------
Seeded random sampling for training sets: Latin Hypercube Sampling of
collocation points and uniform subsampling of reference data.

All randomness flows through `Rng`, a thin wrapper around NumPy's PCG64
bit generator. Worker k of a run (or cell k of a sweep) uses `rng.derive(k)`,
i.e. the generator seeded with `seed + k`.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, TypeVar, Union

import numpy as np

from .errors import ArgumentError

T = TypeVar("T")


class Rng:
    """Reproducible 64-bit random stream (NumPy PCG64, seeded with `seed`)."""

    def __init__(self, seed: int) -> None:
        if int(seed) < 0:
            raise ArgumentError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, index: int) -> "Rng":
        """Independent stream for worker/cell `index` (seed + index)."""
        return Rng(self.seed + int(index))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None) -> np.ndarray:
        return self.generator.normal(loc, scale, size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box, one (lower, upper) pair per dimension."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ArgumentError("box bounds must be non-empty and of equal length")
        for lo, hi in zip(self.lower, self.upper):
            if not lo < hi:
                raise ArgumentError(f"box lower bound {lo} is not below upper bound {hi}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, points: np.ndarray) -> bool:
        points = np.atleast_2d(points)
        return bool(
            np.all(points >= np.asarray(self.lower)) and np.all(points <= np.asarray(self.upper))
        )


def lhs(domain: BoxDomain, n: int, rng: Rng) -> np.ndarray:
    """
    Latin Hypercube sample of `n` points in `domain`.

    Each dimension is cut into `n` equal strata; every stratum holds exactly one
    point, jittered uniformly inside it. Strata are paired across dimensions by
    independent random permutations.

    Args:
        domain (BoxDomain): Sampling box (closed).
        n (int): Number of points, n ≥ 1.
        rng (Rng): Random stream.

    Returns:
        np.ndarray: Array of shape (n, domain.dim).
    """
    if n < 1:
        raise ArgumentError(f"lhs needs n >= 1, got {n}")
    lower = np.asarray(domain.lower, dtype=np.float64)
    upper = np.asarray(domain.upper, dtype=np.float64)
    unit = np.empty((n, domain.dim))
    for d in range(domain.dim):
        strata = rng.permutation(n)
        unit[:, d] = (strata + rng.uniform(size=n)) / n
    return lower + unit * (upper - lower)


def subsample_indices(length: int, n: int, rng: Rng) -> np.ndarray:
    """`n` distinct indices drawn uniformly from range(length)."""
    if n < 0 or n > length:
        raise ArgumentError(f"cannot draw {n} distinct items from {length}")
    return rng.generator.choice(length, size=n, replace=False)


def subsample(dataset: Union[Sequence[T], np.ndarray], n: int, rng: Rng) -> Union[List[T], np.ndarray]:
    """
    Uniform subsample without replacement.

    Args:
        dataset (Union[Sequence[T], np.ndarray]): Items (array rows or list elements).
        n (int): Number of items to draw.
        rng (Rng): Random stream.

    Returns:
        Union[List[T], np.ndarray]: Selected rows (array input) or items (list input).
    """
    indices = subsample_indices(len(dataset), n, rng)
    if isinstance(dataset, np.ndarray):
        return dataset[indices]
    return [dataset[i] for i in indices]


def sample_initial_boundary(
    t_grid: np.ndarray,
    x_grid: np.ndarray,
    n: int,
    rng: Rng,
    ic_fraction: float = 0.5,
) -> np.ndarray:
    """
    Draws `n` (t, x) points from the initial line t = t_grid[0] and the two
    boundary lines x = x_grid[0], x = x_grid[-1] of a reference grid.

    Args:
        t_grid (np.ndarray): Reference time grid (ascending).
        x_grid (np.ndarray): Reference space grid (ascending).
        n (int): Total number of points.
        rng (Rng): Random stream.
        ic_fraction (float): Share of points taken from the initial line.

    Returns:
        np.ndarray: Array of shape (n, 2) with columns (t, x).
    """
    if not 0.0 <= ic_fraction <= 1.0:
        raise ArgumentError(f"ic_fraction must lie in [0, 1], got {ic_fraction}")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    x_grid = np.asarray(x_grid, dtype=np.float64)
    initial = np.column_stack([np.full(x_grid.size, t_grid[0]), x_grid])
    boundary = np.vstack(
        [
            np.column_stack([t_grid, np.full(t_grid.size, x_grid[0])]),
            np.column_stack([t_grid, np.full(t_grid.size, x_grid[-1])]),
        ]
    )
    n_initial = int(round(n * ic_fraction))
    return np.vstack(
        [
            subsample(initial, n_initial, rng.derive(0)),
            subsample(boundary, n - n_initial, rng.derive(1)),
        ]
    )
