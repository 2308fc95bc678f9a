# src/problems/schrodinger.py

"""
Nonlinear Schrödinger equation with periodic boundaries:

    i h_t + 0.5 h_xx + |h|² h = 0,   x ∈ [−5, 5], t ∈ [0, π/2],
    h(0, x) = 2 sech(x),  h(t, −5) = h(t, 5),  h_x(t, −5) = h_x(t, 5).

The network outputs (u, v) = (Re h, Im h).
"""

import math
from typing import Dict, List, Mapping, Optional

import numpy as np

from ..autodiff import Graph, Variable
from ..continuous_time import BoundaryKind, CtProblem, CtTrainingSet, NetworkFields
from ..custom_logger import log
from ..errors import ArgumentError
from ..metrics_io import SolutionGrid, rel_l2
from ..network import MLPConfig, forward
from ..objective import LossTerm
from ..refsolve import NLS_DOMAIN, SpectralConfig, cached_reference, nls_spectral, spectral_settings
from ..sampler import BoxDomain, Rng, lhs, subsample_indices
from .operators import schrodinger_residual

T_FINAL = math.pi / 2
REFERENCE_DEFAULTS = {"modes": 256, "time_step": 1e-4, "integrator": "rk4", "snapshots": 201}


def nls_reference(cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
    merged = {**REFERENCE_DEFAULTS, **(settings or {})}
    config = SpectralConfig(
        modes=int(merged["modes"]),
        time_step=float(merged["time_step"]),
        integrator=str(merged["integrator"]),
        length=NLS_DOMAIN[1] - NLS_DOMAIN[0],
        snapshots=int(merged["snapshots"]),
    )
    return cached_reference(
        cache_directory, "nls-spectral", spectral_settings(config, T_FINAL), lambda: nls_spectral(config, T_FINAL)
    )


class SchrodingerCt(CtProblem):
    """Continuous-time NLS: MSE_0 + MSE_b + MSE_f, each a mean over its points."""

    components = ("u", "v")
    headline_component = "h"
    snapshot_times = (0.375 * T_FINAL, 0.5 * T_FINAL, 0.625 * T_FINAL)

    @property
    def problem_id(self) -> str:
        return "nls-ct"

    def __init__(self, network: MLPConfig) -> None:
        lo, hi = NLS_DOMAIN
        super().__init__(network, BoxDomain((0.0, lo), (T_FINAL, hi)), BoundaryKind.PERIODIC)

    def residuals(self, fields: NetworkFields) -> List[Variable]:
        u, v = fields.u
        u_t, v_t = fields.u_t
        u_xx, v_xx = fields.u_xx
        return list(schrodinger_residual(u, v, u_t, v_t, u_xx, v_xx))

    def loss_terms(self, data: CtTrainingSet) -> List[LossTerm]:
        if data.x_0.size == 0:
            raise ArgumentError("the Schrödinger loss needs at least one initial point (N_0 >= 1)")
        if data.t_b.size == 0:
            raise ArgumentError("the Schrödinger loss needs at least one boundary time (N_b >= 1)")
        network = self.network
        lo, hi = NLS_DOMAIN

        def initial_misfit(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            u, v = forward(network, params, [graph.constant(0.0), lanes["x"]], graph)
            du = u - lanes["u0"]
            dv = v - lanes["v0"]
            return graph.linear([(du, du), (dv, dv)])

        def periodic_mismatch(graph: Graph, params: List[Variable], lanes: Dict[str, Variable]) -> Variable:
            left = forward(network, params, [lanes["t"], lanes["x_lo"]], graph)
            right = forward(network, params, [lanes["t"], lanes["x_hi"]], graph)
            left_x = graph.jvp(left, lanes["x_lo"])
            right_x = graph.jvp(right, lanes["x_hi"])
            gaps = [a - b for a, b in zip(left + left_x, right + right_x)]
            return graph.linear([(g, g) for g in gaps])

        n_b = data.t_b.size
        return [
            LossTerm(
                "mse_0",
                {"x": data.x_0, "u0": data.h_0[:, 0], "v0": data.h_0[:, 1]},
                initial_misfit,
            ),
            LossTerm(
                "mse_b",
                {"t": data.t_b, "x_lo": np.full(n_b, lo), "x_hi": np.full(n_b, hi)},
                periodic_mismatch,
            ),
            self.residual_term("mse_f", data.t_f, data.x_f),
        ]

    def reference(self, cache_directory=None, settings: Optional[Mapping[str, object]] = None) -> SolutionGrid:
        return nls_reference(cache_directory, settings)

    def sample_training_set(
        self, reference: SolutionGrid, rng: Rng, counts: Mapping[str, int], noise: float = 0.0
    ) -> CtTrainingSet:
        """N_0 initial points and N_b boundary times from the reference grid, N_f by Latin hypercube."""
        n_0 = int(counts.get("n_0", 0))
        n_b = int(counts.get("n_b", 0))
        n_f = int(counts.get("n_f", 0))
        initial = subsample_indices(reference.x.size, n_0, rng.derive(0))
        h_0 = np.column_stack([reference.values["u"][0, initial], reference.values["v"][0, initial]])
        if noise > 0.0 and n_0 > 0:
            h_0 = h_0 + noise * np.std(h_0, axis=0) * rng.derive(3).normal(size=(n_0, 2))
        t_b = reference.t[subsample_indices(reference.t.size, n_b, rng.derive(1))]
        collocation = lhs(self.domain, n_f, rng.derive(2)) if n_f else np.zeros((0, 2))
        log.debug(f"Sampled NLS training set: N_0={n_0}, N_b={n_b}, N_f={n_f}")
        return CtTrainingSet(
            x_0=reference.x[initial],
            h_0=h_0,
            t_b=t_b,
            t_f=collocation[:, 0],
            x_f=collocation[:, 1],
        )

    def derived_components(self, values: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        return {**values, "h": np.sqrt(values["u"] ** 2 + values["v"] ** 2)}

    def rel_l2(self, grid: SolutionGrid) -> Dict[str, float]:
        """Headline error on |h|, plus the joint (u, v) error."""
        joint = rel_l2(
            np.stack([grid.values["u"], grid.values["v"]]),
            np.stack([grid.reference["u"], grid.reference["v"]]),
        )
        return {"rel_l2": grid.rel_l2("h"), "rel_l2_uv": joint}
