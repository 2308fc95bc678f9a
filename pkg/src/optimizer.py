# src/optimizer.py

"""
Optimizer Module
----------------
Full-batch L-BFGS (two-loop recursion) with a strong-Wolfe line search, plus an
optional Adam warm-up phase. Works on any objective `x -> (value, gradient)`.
"""

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Deque, List, Optional, Tuple

import numpy as np

from .custom_logger import log
from .errors import ArgumentError

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]

CURVATURE_EPS = 1e-10


@dataclass
class LBFGSConfig:
    """
    L-BFGS settings.

    Attributes:
        objective_rel_tolerance (float): Stop when the decrease f_prev − f is at most this times
            max(|f_prev|, |f|, 1), so the test is absolute once |f| drops below 1.
    """

    memory: int = 50
    max_iterations: int = 50000
    grad_tolerance: float = 1e-8
    objective_rel_tolerance: float = 1e-12
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search_steps: int = 50
    adam_warmup_iterations: int = 0
    adam_learning_rate: float = 1e-3
    log_path: Optional[str] = None
    progress_every: int = 500

    def __post_init__(self) -> None:
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ArgumentError(
                f"Wolfe constants need 0 < c1 < c2 < 1, got c1={self.wolfe_c1}, c2={self.wolfe_c2}"
            )
        if self.memory < 1:
            raise ArgumentError(f"memory must be >= 1, got {self.memory}")
        if self.max_iterations < 0 or self.max_line_search_steps < 1:
            raise ArgumentError("iteration limits must be non-negative")
        if self.adam_warmup_iterations < 0:
            raise ArgumentError("adam_warmup_iterations must be >= 0")


class Termination(str, Enum):
    GRAD_TOL = "grad_tol"
    OBJ_TOL = "obj_tol"
    MAX_ITER = "max_iter"
    LINE_SEARCH_FAILURE = "line_search_failure"


@dataclass
class LineSearchStep:
    """Line-search record: φ(α) = f(x + α d)."""

    alpha: float
    phi0: float
    dphi0: float
    phi: float
    dphi: float


@dataclass
class LineSearchResult:
    alpha: float
    value: float
    gradient: np.ndarray
    evaluations: int


@dataclass
class OptimizeReport:
    params: np.ndarray
    objective: float
    iterations: int
    grad_norm: float
    reason: Termination
    history: List[float] = field(default_factory=list)
    steps: List[LineSearchStep] = field(default_factory=list)
    evaluations: int = 0
    warmup_iterations: int = 0


LineSearch = Callable[
    [Objective, np.ndarray, np.ndarray, float, np.ndarray, LBFGSConfig, float],
    Optional[LineSearchResult],
]


def _cubic_minimizer(
    a: float, fa: float, da: float, b: float, fb: float, db: float
) -> Optional[float]:
    """Minimizer of the cubic through (a, fa, da) and (b, fb, db), or None."""
    with np.errstate(all="ignore"):
        d1 = da + db - 3.0 * (fa - fb) / (a - b)
        radicand = d1 * d1 - da * db
        if not np.isfinite(radicand) or radicand < 0.0:
            return None
        d2 = math.copysign(math.sqrt(radicand), b - a)
        denominator = db - da + 2.0 * d2
        if denominator == 0.0 or not np.isfinite(denominator):
            return None
        alpha = b - (b - a) * (db + d2 - d1) / denominator
    return float(alpha) if np.isfinite(alpha) else None


def strong_wolfe_search(
    objective: Objective,
    x: np.ndarray,
    direction: np.ndarray,
    value: float,
    gradient: np.ndarray,
    config: LBFGSConfig,
    alpha0: float = 1.0,
) -> Optional[LineSearchResult]:
    """
    Bracketing + zoom line search for the strong Wolfe conditions.

    Returns:
        Optional[LineSearchResult]: The accepted step, or None after
        `config.max_line_search_steps` trial evaluations without success.
    """
    c1, c2 = config.wolfe_c1, config.wolfe_c2
    phi0 = value
    dphi0 = float(gradient @ direction)
    evaluations = 0

    def phi(alpha: float) -> Tuple[float, np.ndarray, float]:
        nonlocal evaluations
        evaluations += 1
        f, g = objective(x + alpha * direction)
        f = float(f) if np.isfinite(f) else math.inf
        dphi = float(g @ direction) if np.all(np.isfinite(g)) else math.inf
        return f, g, dphi

    def accepted(alpha: float, f: float, dphi: float) -> bool:
        return f <= phi0 + c1 * alpha * dphi0 and abs(dphi) <= -c2 * dphi0

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi) -> Optional[LineSearchResult]:
        while evaluations < config.max_line_search_steps:
            delta = abs(hi - lo)
            alpha = _cubic_minimizer(lo, f_lo, d_lo, hi, f_hi, d_hi)
            low_end, high_end = min(lo, hi), max(lo, hi)
            if alpha is None or not (low_end + 0.1 * delta <= alpha <= high_end - 0.1 * delta):
                alpha = 0.5 * (lo + hi)
            f, g, dphi = phi(alpha)
            if f > phi0 + c1 * alpha * dphi0 or f >= f_lo:
                hi, f_hi, d_hi = alpha, f, dphi
                continue
            if abs(dphi) <= -c2 * dphi0:
                return LineSearchResult(alpha, f, g, evaluations)
            if dphi * (hi - lo) >= 0.0:
                hi, f_hi, d_hi = lo, f_lo, d_lo
            lo, f_lo, d_lo = alpha, f, dphi
        return None

    alpha_prev, f_prev, d_prev = 0.0, phi0, dphi0
    alpha = alpha0
    first = True
    while evaluations < config.max_line_search_steps:
        f, g, dphi = phi(alpha)
        if f > phi0 + c1 * alpha * dphi0 or (not first and f >= f_prev):
            return zoom(alpha_prev, f_prev, d_prev, alpha, f, dphi)
        if abs(dphi) <= -c2 * dphi0:
            return LineSearchResult(alpha, f, g, evaluations)
        if dphi >= 0.0:
            return zoom(alpha, f, dphi, alpha_prev, f_prev, d_prev)
        alpha_prev, f_prev, d_prev = alpha, f, dphi
        alpha *= 2.0
        first = False
    return None


def bisection_line_search(
    objective: Objective,
    x: np.ndarray,
    direction: np.ndarray,
    value: float,
    gradient: np.ndarray,
    config: LBFGSConfig,
    alpha0: float = 1.0,
) -> Optional[LineSearchResult]:
    """
    Near-exact line search: brackets the first zero of φ'(α) and bisects it.
    Intended for smooth convex objectives (e.g. quadratics).
    """
    dphi0 = float(gradient @ direction)
    evaluations = 0

    def dphi_at(alpha: float) -> Tuple[float, np.ndarray, float]:
        nonlocal evaluations
        evaluations += 1
        f, g = objective(x + alpha * direction)
        return float(f), g, float(g @ direction)

    lo, hi = 0.0, alpha0
    f, g, dphi = dphi_at(hi)
    while dphi < 0.0:
        if evaluations >= 200:
            return None
        lo, hi = hi, 2.0 * hi
        f, g, dphi = dphi_at(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f, g, dphi = dphi_at(mid)
        if abs(dphi) <= 1e-14 * abs(dphi0) or hi - lo <= 1e-16 * hi:
            return LineSearchResult(mid, f, g, evaluations)
        if dphi < 0.0:
            lo = mid
        else:
            hi = mid
    return LineSearchResult(mid, f, g, evaluations)


def _two_loop(gradient: np.ndarray, pairs: Deque[Tuple[np.ndarray, np.ndarray, float]]) -> np.ndarray:
    """Returns -H·g using the stored (s, y, 1/sᵀy) pairs, oldest first."""
    q = gradient.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def adam(
    objective: Objective,
    x0: np.ndarray,
    iterations: int,
    learning_rate: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[np.ndarray, float, np.ndarray]:
    """Plain Adam; returns the final (x, value, gradient)."""
    x = np.array(x0, dtype=np.float64)
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    value, gradient = objective(x)
    for k in range(1, iterations + 1):
        m = beta1 * m + (1.0 - beta1) * gradient
        v = beta2 * v + (1.0 - beta2) * gradient * gradient
        m_hat = m / (1.0 - beta1**k)
        v_hat = v / (1.0 - beta2**k)
        x = x - learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        value, gradient = objective(x)
    log.debug(f"Adam warm-up finished after {iterations} iterations, loss={value:.6e}")
    return x, float(value), gradient


def minimize(
    objective: Objective,
    x0: np.ndarray,
    config: Optional[LBFGSConfig] = None,
    line_search: LineSearch = strong_wolfe_search,
) -> OptimizeReport:
    """
    Minimizes `objective` with L-BFGS.

    Args:
        objective (Objective): Maps parameters to (value, gradient).
        x0 (np.ndarray): Starting point.
        config (Optional[LBFGSConfig]): Settings; defaults when None.
        line_search (LineSearch): Step-length rule.

    Returns:
        OptimizeReport: Final state and termination reason. A failed line search
        ends the run with the last accepted iterate.

    Raises:
        ArgumentError: Non-finite objective or gradient at x0.
    """
    config = config or LBFGSConfig()
    x = np.array(x0, dtype=np.float64)
    value, gradient = objective(x)
    value = float(value)
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.isfinite(value) or not np.all(np.isfinite(gradient)):
        raise ArgumentError("objective is not finite at the starting point")
    evaluations = 1

    warmup = config.adam_warmup_iterations
    if warmup:
        x, value, gradient = adam(objective, x, warmup, config.adam_learning_rate)
        evaluations += warmup
        if not np.isfinite(value):
            raise ArgumentError("objective became non-finite during Adam warm-up")

    writer = None
    log_file = None
    if config.log_path:
        Path(config.log_path).parent.mkdir(parents=True, exist_ok=True)
        log_file = open(config.log_path, "w", newline="", encoding="utf-8")
        writer = csv.writer(log_file, lineterminator="\n")
        writer.writerow(["iteration", "objective", "grad_norm"])

    pairs: Deque[Tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=config.memory)
    history = [value]
    steps: List[LineSearchStep] = []
    grad_norm = float(np.linalg.norm(gradient))
    iterations = 0
    reason = Termination.MAX_ITER
    try:
        if writer:
            writer.writerow([0, repr(value), repr(grad_norm)])
        if grad_norm <= config.grad_tolerance:
            reason = Termination.GRAD_TOL
        else:
            for iteration in range(1, config.max_iterations + 1):
                direction = _two_loop(gradient, pairs)
                if gradient @ direction >= 0.0:
                    log.debug(f"Iteration {iteration}: not a descent direction, resetting memory")
                    pairs.clear()
                    direction = -gradient
                alpha0 = 1.0 if pairs else min(1.0, 1.0 / grad_norm)
                dphi0 = float(gradient @ direction)
                result = line_search(objective, x, direction, value, gradient, config, alpha0)
                if result is None:
                    evaluations += config.max_line_search_steps
                    reason = Termination.LINE_SEARCH_FAILURE
                    log.warning(f"Line search failed at iteration {iteration}; keeping last iterate")
                    break
                evaluations += result.evaluations
                new_gradient = np.asarray(result.gradient, dtype=np.float64)
                s = result.alpha * direction
                y = new_gradient - gradient
                sy = float(s @ y)
                if sy > CURVATURE_EPS * np.linalg.norm(s) * np.linalg.norm(y):
                    pairs.append((s, y, 1.0 / sy))
                else:
                    log.debug(f"Iteration {iteration}: skipped curvature pair (sᵀy={sy:.3e})")
                steps.append(
                    LineSearchStep(
                        result.alpha, value, dphi0, result.value, float(new_gradient @ direction)
                    )
                )
                previous = value
                x = x + s
                value = float(result.value)
                gradient = new_gradient
                grad_norm = float(np.linalg.norm(gradient))
                iterations = iteration
                history.append(value)
                if writer:
                    writer.writerow([iteration, repr(value), repr(grad_norm)])
                if config.progress_every and iteration % config.progress_every == 0:
                    log.info(f"L-BFGS iteration {iteration}: loss={value:.6e} |g|={grad_norm:.3e}")
                if grad_norm <= config.grad_tolerance:
                    reason = Termination.GRAD_TOL
                    break
                scale = max(abs(previous), abs(value), 1.0)
                if previous - value <= config.objective_rel_tolerance * scale:
                    reason = Termination.OBJ_TOL
                    break
    finally:
        if log_file:
            log_file.close()

    log.debug(
        f"L-BFGS stopped ({reason.value}) after {iterations} iterations: "
        f"loss={value:.6e} |g|={grad_norm:.3e}"
    )
    return OptimizeReport(
        params=x,
        objective=value,
        iterations=iterations,
        grad_norm=grad_norm,
        reason=reason,
        history=history,
        steps=steps,
        evaluations=evaluations,
        warmup_iterations=warmup,
    )
