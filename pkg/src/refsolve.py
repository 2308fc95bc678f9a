# src/refsolve.py

"""
Reference Solvers
-----------------
Ground-truth data for the benchmarks:

* `burgers_exact`        Cole–Hopf solution of viscous Burgers via Gauss–Hermite quadrature.
* `nls_spectral`         Fourier pseudospectral nonlinear Schrödinger, h(0,x) = 2 sech(x) on [−5, 5).
* `allen_cahn_spectral`  Fourier pseudospectral Allen–Cahn, u(0,x) = x² cos(πx) on [−1, 1).
* `burgers_spectral`     Fourier pseudospectral Burgers, cross-check for `burgers_exact`.

Every spectral problem is written as v' = L v + N(v) in Fourier space with a
diagonal linear part L and is stepped with classical RK4 or with ETDRK4
(coefficients from contour averages, Kassam & Trefethen). Nonlinear terms are
dealiased with the 2/3 rule.
"""

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, Optional, Union

import numpy as np
import scipy.fft as fft
from scipy.special import roots_hermite

from .custom_logger import log
from .errors import ArgumentError, NumericalError
from .helpers import settings_hash
from .metrics_io import SolutionGrid, read_grid, write_grid

BURGERS_NU = 0.01 / math.pi
NLS_DOMAIN = (-5.0, 5.0)
ALLEN_CAHN_DOMAIN = (-1.0, 1.0)
BLOW_UP = 1e6
INTEGRATORS = ("rk4", "etdrk4")


@dataclass(frozen=True)
class SpectralConfig:
    modes: int
    time_step: float
    integrator: str = "rk4"
    length: float = 2.0
    snapshots: int = 201
    contour_points: int = 64

    def __post_init__(self) -> None:
        if self.modes < 2 or self.modes & (self.modes - 1):
            raise ArgumentError(f"modes must be a power of two, got {self.modes}")
        if not self.time_step > 0.0:
            raise ArgumentError(f"time_step must be positive, got {self.time_step}")
        if self.integrator not in INTEGRATORS:
            raise ArgumentError(f"integrator must be one of {INTEGRATORS}, got '{self.integrator}'")
        if not self.length > 0.0:
            raise ArgumentError(f"domain length must be positive, got {self.length}")
        if self.snapshots < 2:
            raise ArgumentError("at least two snapshots are needed")


# ----------------------------------------------------------------------
# Burgers: Cole–Hopf
# ----------------------------------------------------------------------


def hermite_node_count(t: float, nu: float, nodes: Optional[int] = None) -> int:
    if nodes is not None:
        return nodes
    return 254 if t * nu < 1e-4 else 100


def burgers_exact(
    t: float, x: Union[float, np.ndarray], nu: float = BURGERS_NU, nodes: Optional[int] = None
) -> Union[float, np.ndarray]:
    """
    Exact solution of u_t + u u_x = ν u_xx, u(0,x) = −sin(πx), u(t,±1) = 0.

    Evaluates the Cole–Hopf quotient

        u = −∫ sin(π(x − c y)) f(x − c y) e^{−y²} dy / ∫ f(x − c y) e^{−y²} dy,

    with c = sqrt(4νt) and f(z) = exp(−cos(πz) / (2πν)), by Gauss–Hermite quadrature.

    Args:
        t (float): Time, t ≥ 0.
        x (Union[float, np.ndarray]): Position(s) in [−1, 1].
        nu (float): Viscosity, ν > 0.
        nodes (Optional[int]): Quadrature size; 100, or 254 when t·ν < 1e-4.

    Raises:
        NumericalError: The quadrature denominator underflows.
    """
    if t < 0.0 or not nu > 0.0:
        raise ArgumentError(f"need t >= 0 and nu > 0, got t={t}, nu={nu}")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if t == 0.0:
        u = -np.sin(np.pi * x)
        return float(u[0]) if scalar else u
    y, w = roots_hermite(hermite_node_count(t, nu, nodes))
    c = math.sqrt(4.0 * nu * t)
    z = x[:, None] - c * y[None, :]
    exponent = -np.cos(np.pi * z) / (2.0 * np.pi * nu)
    weights = w[None, :] * np.exp(exponent - exponent.max(axis=1, keepdims=True))
    numerator = -np.sum(weights * np.sin(np.pi * z), axis=1)
    denominator = np.sum(weights, axis=1)
    if np.any(denominator < 1e-300):
        raise NumericalError(f"Cole-Hopf quadrature broke down at t={t}")
    u = numerator / denominator
    return float(u[0]) if scalar else u


def burgers_exact_grid(t_grid: np.ndarray, x_grid: np.ndarray, nu: float = BURGERS_NU) -> SolutionGrid:
    t_grid = np.asarray(t_grid, dtype=np.float64)
    x_grid = np.asarray(x_grid, dtype=np.float64)
    u = np.vstack([burgers_exact(float(t), x_grid, nu) for t in t_grid])
    return SolutionGrid(t=t_grid, x=x_grid, values={"u": u})


# ----------------------------------------------------------------------
# Fourier machinery
# ----------------------------------------------------------------------


class SpectralProblem:
    """v' = L v + N(v) on a periodic grid of `config.modes` points starting at `x0`."""

    def __init__(
        self,
        config: SpectralConfig,
        x0: float,
        linear: Callable[[np.ndarray], np.ndarray],
        nonlinear: Callable[[np.ndarray, "SpectralProblem"], np.ndarray],
    ) -> None:
        n = config.modes
        self.config = config
        self.x = x0 + config.length * np.arange(n) / n
        self.k = 2.0 * np.pi * fft.fftfreq(n, d=config.length / n)
        self.linear = linear(self.k)
        index = np.abs(fft.fftfreq(n, d=1.0 / n))
        self.dealias = index < n / 3.0
        self.nonlinear = nonlinear

    def to_physical(self, v: np.ndarray) -> np.ndarray:
        return fft.ifft(v)

    def transform(self, values: np.ndarray) -> np.ndarray:
        return self.dealias * fft.fft(values)

    def rhs(self, v: np.ndarray) -> np.ndarray:
        return self.linear * v + self.nonlinear(v, self)


def _rk4_stepper(problem: SpectralProblem, h: float) -> Callable[[np.ndarray], np.ndarray]:
    def step(v: np.ndarray) -> np.ndarray:
        k1 = problem.rhs(v)
        k2 = problem.rhs(v + 0.5 * h * k1)
        k3 = problem.rhs(v + 0.5 * h * k2)
        k4 = problem.rhs(v + h * k3)
        return v + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    return step


def _etdrk4_stepper(problem: SpectralProblem, h: float) -> Callable[[np.ndarray], np.ndarray]:
    linear = problem.linear
    m = problem.config.contour_points
    roots = np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    lr = h * linear[:, None] + roots[None, :]
    exp_lr = np.exp(lr)
    half = np.exp(0.5 * h * linear)
    full = np.exp(h * linear)
    q = h * np.mean((np.exp(lr / 2.0) - 1.0) / lr, axis=1)
    f1 = h * np.mean((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr**2)) / lr**3, axis=1)
    f2 = h * np.mean((2.0 + lr + exp_lr * (lr - 2.0)) / lr**3, axis=1)
    f3 = h * np.mean((-4.0 - 3.0 * lr - lr**2 + exp_lr * (4.0 - lr)) / lr**3, axis=1)
    if np.all(np.isreal(linear)):
        q, f1, f2, f3 = q.real, f1.real, f2.real, f3.real
    nonlinear = problem.nonlinear

    def step(v: np.ndarray) -> np.ndarray:
        nv = nonlinear(v, problem)
        a = half * v + q * nv
        na = nonlinear(a, problem)
        b = half * v + q * na
        nb = nonlinear(b, problem)
        c = half * a + q * (2.0 * nb - nv)
        nc = nonlinear(c, problem)
        return full * v + f1 * nv + 2.0 * f2 * (na + nb) + f3 * nc

    return step


def integrate(problem: SpectralProblem, u0: np.ndarray, t_final: float) -> SolutionGrid:
    """
    Steps from u0 to t_final and stores `config.snapshots` uniform snapshots.

    The step is shrunk so that every snapshot time is hit exactly.

    Returns:
        SolutionGrid: Complex field under the key "h" (callers split it into components).
    """
    config = problem.config
    intervals = config.snapshots - 1
    t_grid = np.linspace(0.0, t_final, config.snapshots)
    per_interval = max(1, math.ceil((t_final / intervals) / config.time_step - 1e-9))
    h = (t_final / intervals) / per_interval
    stepper = (_rk4_stepper if config.integrator == "rk4" else _etdrk4_stepper)(problem, h)
    log.debug(
        f"Spectral integration: {config.modes} modes, {config.integrator}, "
        f"{intervals * per_interval} steps of {h:.3e}"
    )
    v = fft.fft(np.asarray(u0, dtype=np.complex128))
    fields = np.empty((config.snapshots, config.modes), dtype=np.complex128)
    fields[0] = u0
    for snapshot in range(1, config.snapshots):
        for _ in range(per_interval):
            v = stepper(v)
        values = fft.ifft(v)
        peak = np.max(np.abs(values))
        if not np.isfinite(peak) or peak > BLOW_UP:
            raise NumericalError(
                f"spectral solution blew up (max |u| = {peak:.3e}) before t = {t_grid[snapshot]:.4f}"
            )
        fields[snapshot] = values
    return SolutionGrid(t=t_grid, x=problem.x, values={"h": fields})


# ----------------------------------------------------------------------
# benchmark equations
# ----------------------------------------------------------------------


def _nls_nonlinear(v: np.ndarray, problem: SpectralProblem) -> np.ndarray:
    h = problem.to_physical(v)
    return 1j * problem.transform(np.abs(h) ** 2 * h)


def nls_spectral(config: SpectralConfig, t_final: float = math.pi / 2) -> SolutionGrid:
    """
    i h_t + 0.5 h_xx + |h|² h = 0 on [−5, 5) periodic, h(0, x) = 2 sech(x).

    Returns:
        SolutionGrid: Components "u" (real part), "v" (imaginary part) and "h" (|h|).
    """
    lo, hi = NLS_DOMAIN
    if config.length != hi - lo:
        raise ArgumentError(f"NLS domain length is {hi - lo}, config says {config.length}")
    problem = SpectralProblem(config, lo, lambda k: -0.5j * k**2, _nls_nonlinear)
    h0 = 2.0 / np.cosh(problem.x)
    grid = integrate(problem, h0, t_final)
    h = grid.values["h"]
    return SolutionGrid(t=grid.t, x=grid.x, values={"u": h.real.copy(), "v": h.imag.copy(), "h": np.abs(h)})


def _allen_cahn_nonlinear(v: np.ndarray, problem: SpectralProblem) -> np.ndarray:
    u = problem.to_physical(v).real
    return problem.transform(5.0 * u - 5.0 * u**3)


def allen_cahn_spectral(config: SpectralConfig, t_final: float = 1.0) -> SolutionGrid:
    """u_t − 0.0001 u_xx + 5u³ − 5u = 0 on [−1, 1) periodic, u(0, x) = x² cos(πx)."""
    lo, hi = ALLEN_CAHN_DOMAIN
    if config.length != hi - lo:
        raise ArgumentError(f"Allen-Cahn domain length is {hi - lo}, config says {config.length}")
    problem = SpectralProblem(config, lo, lambda k: -1e-4 * k**2, _allen_cahn_nonlinear)
    u0 = problem.x**2 * np.cos(np.pi * problem.x)
    grid = integrate(problem, u0, t_final)
    return SolutionGrid(t=grid.t, x=grid.x, values={"u": grid.values["h"].real.copy()})


def _burgers_nonlinear(v: np.ndarray, problem: SpectralProblem) -> np.ndarray:
    u = problem.to_physical(v).real
    return -0.5j * problem.k * problem.transform(u * u)


def burgers_spectral(config: SpectralConfig, t_final: float = 0.99, nu: float = BURGERS_NU) -> SolutionGrid:
    """
    u_t + u u_x = ν u_xx on [−1, 1) periodic with u(0, x) = −sin(πx).

    The initial condition is odd and 2-periodic, so u(t, ±1) = 0 is preserved.
    """
    problem = SpectralProblem(config, -1.0, lambda k: -nu * k**2, _burgers_nonlinear)
    u0 = -np.sin(np.pi * problem.x)
    grid = integrate(problem, u0, t_final)
    return SolutionGrid(t=grid.t, x=grid.x, values={"u": grid.values["h"].real.copy()})


def mass(grid: SolutionGrid, time_index: int, length: float) -> float:
    """∫|h|² dx at one snapshot (periodic trapezoid rule)."""
    if "u" in grid.values and "v" in grid.values:
        density = grid.values["u"][time_index] ** 2 + grid.values["v"][time_index] ** 2
    else:
        density = grid.values["u"][time_index] ** 2
    return float(np.sum(density) * length / density.size)


def spatial_mean(grid: SolutionGrid, time_index: int, component: str = "u") -> float:
    return float(np.mean(grid.values[component][time_index]))


# ----------------------------------------------------------------------
# cached reference grids
# ----------------------------------------------------------------------


def cached_reference(
    cache_directory: Union[str, Path, None],
    name: str,
    settings: Dict[str, object],
    generate: Callable[[], SolutionGrid],
) -> SolutionGrid:
    """
    Returns a reference grid from `<cache>/references/<name>_<hash>.csv`, generating it on a miss.
    """
    if cache_directory is None:
        return generate()
    digest = settings_hash({"name": name, **settings})[:16]
    path = Path(cache_directory) / "references" / f"{name}_{digest}.csv"
    if path.exists():
        log.info(f"Reference cache hit: {path}")
        return read_grid(path)
    log.info(f"Generating reference data '{name}'")
    grid = generate()
    write_grid(path, grid)
    log.info(f"Cached reference data at {path}")
    return grid


def spectral_settings(config: SpectralConfig, t_final: float) -> Dict[str, object]:
    return {**asdict(config), "t_final": t_final}
