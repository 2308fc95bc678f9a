# src/problems/allen_cahn.py

"""
Allen–Cahn equation with periodic boundaries:

    u_t − 0.0001 u_xx + 5u³ − 5u = 0,   x ∈ [−1, 1],
    u(0, x) = x² cos(πx),  u(t, −1) = u(t, 1),  u_x(t, −1) = u_x(t, 1).
"""

from typing import Mapping, Optional

from ..continuous_time import BoundaryKind
from ..discrete_time import DtProblem
from ..metrics_io import SolutionGrid
from ..network import MLPConfig
from ..refsolve import ALLEN_CAHN_DOMAIN, SpectralConfig, allen_cahn_spectral, cached_reference, spectral_settings
from ..tableau import ButcherTableau
from .operators import allen_cahn_operator

T_FINAL = 1.0
REFERENCE_DEFAULTS = {"modes": 512, "time_step": 1e-3, "integrator": "etdrk4", "snapshots": 201}


def allen_cahn_reference(cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
    merged = {**REFERENCE_DEFAULTS, **(settings or {})}
    config = SpectralConfig(
        modes=int(merged["modes"]),
        time_step=float(merged["time_step"]),
        integrator=str(merged["integrator"]),
        length=ALLEN_CAHN_DOMAIN[1] - ALLEN_CAHN_DOMAIN[0],
        snapshots=int(merged["snapshots"]),
    )
    return cached_reference(
        cache_directory,
        "allen-cahn-spectral",
        spectral_settings(config, T_FINAL),
        lambda: allen_cahn_spectral(config, T_FINAL),
    )


class AllenCahnDt(DtProblem):
    """Discrete-time Allen–Cahn; SSE_b matches values and x-derivatives at x = ±1."""

    x_range = ALLEN_CAHN_DOMAIN

    @property
    def problem_id(self) -> str:
        return "allen-cahn-dt"

    def __init__(self, network: MLPConfig, tableau: ButcherTableau, dt: float = 0.8, t_start: float = 0.1) -> None:
        super().__init__(network, tableau, dt, BoundaryKind.PERIODIC, t_start)

    def operator(self, u, u_x, u_xx):
        return allen_cahn_operator(u, u_xx)

    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        return allen_cahn_reference(cache_directory, settings)
