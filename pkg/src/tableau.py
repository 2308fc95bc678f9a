# src/tableau.py

"""
Tableau Module
--------------
q-stage Gauss–Legendre implicit Runge–Kutta tableaux.

Nodes come from Newton iteration on the Legendre three-term recurrence in
extended precision (mpmath). The stage matrix uses the shifted-Legendre
expansion of the Lagrange basis, which Gauss quadrature makes exact:

    a_ij = b_j · [ c_i + Σ_{k=1}^{q-1} P̃_k(c_j) · (P̃_{k+1}(c_i) − P̃_{k−1}(c_i)) / 2 ]

with P̃_k(τ) = P_k(2τ − 1). No Vandermonde systems are solved at any q.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import mpmath
import numpy as np

from .custom_logger import log
from .errors import ArgumentError, NumericalError, ParseError
from .helpers import atomic_write_text, format_real

MAX_NEWTON_ITERATIONS = 100


def default_precision(q: int) -> int:
    """Generation precision in bits: 256 up to q = 100, 768 beyond."""
    return 256 if q <= 100 else 768


def acceptance_tolerance(q: int) -> float:
    return 1e-10 * q


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    q: int
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    precision_bits: int

    def __post_init__(self) -> None:
        for name in ("c", "a", "b"):
            getattr(self, name).setflags(write=False)


def _context(precision_bits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = precision_bits
    return ctx


def _legendre_with_derivative(ctx, q: int, x) -> Tuple[object, object]:
    """P_q(x) and P_q'(x) from the three-term recurrence."""
    p_prev, p = ctx.mpf(1), x
    for k in range(1, q):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    if q == 0:
        return ctx.mpf(1), ctx.mpf(0)
    derivative = q * (x * p - p_prev) / (x * x - 1)
    return p, derivative


def _roots_on_interval(ctx, q: int) -> List[Tuple[object, object]]:
    """(x, P_q'(x)) for every root of P_q on (−1, 1), ascending in x."""
    positive = []
    for k in range(1, q // 2 + 1):
        x = ctx.cos(ctx.pi * (4 * k - 1) / (4 * q + 2))
        for iteration in range(MAX_NEWTON_ITERATIONS + 1):
            if iteration == MAX_NEWTON_ITERATIONS:
                raise NumericalError(
                    f"Newton iteration for Legendre root {k} of degree {q} did not converge "
                    f"in {MAX_NEWTON_ITERATIONS} iterations at {ctx.prec} bits"
                )
            value, derivative = _legendre_with_derivative(ctx, q, x)
            step = value / derivative
            x -= step
            if abs(step) <= 4 * ctx.eps:
                break
        _, derivative = _legendre_with_derivative(ctx, q, x)
        positive.append((x, derivative))
    # P_q has parity (−1)^q, so P_q' at −x equals (−1)^(q+1) P_q'(x); only its square is used.
    roots = [(-x, d) for x, d in positive]
    if q % 2:
        _, derivative = _legendre_with_derivative(ctx, q, ctx.mpf(0))
        roots.append((ctx.mpf(0), derivative))
    roots.extend(reversed(positive))
    return roots


def legendre_roots(q: int, precision_bits: Optional[int] = None) -> List[float]:
    """
    Roots of the degree-q Legendre polynomial shifted to (0, 1), ascending.

    Args:
        q (int): Degree, q ≥ 1.
        precision_bits (Optional[int]): Working precision (≥ 64 bits).

    Returns:
        List[float]: The q Gauss nodes rounded to 64-bit.

    Raises:
        NumericalError: Newton did not converge within 100 iterations.
    """
    precision_bits = _check_arguments(q, precision_bits)
    ctx = _context(precision_bits)
    return [float((1 + x) / 2) for x, _ in _roots_on_interval(ctx, q)]


def _check_arguments(q: int, precision_bits: Optional[int]) -> int:
    if int(q) != q or q < 1:
        raise ArgumentError(f"stage count must be a positive integer, got {q}")
    if precision_bits is None:
        precision_bits = default_precision(q)
    if precision_bits < 64:
        raise ArgumentError(f"precision_bits must be >= 64, got {precision_bits}")
    return int(precision_bits)


def gauss_legendre_tableau(q: int, precision_bits: Optional[int] = None, check: bool = True) -> ButcherTableau:
    """
    Builds the q-stage Gauss–Legendre tableau in extended precision and rounds it to 64-bit.

    Args:
        q (int): Number of stages.
        precision_bits (Optional[int]): Working precision; `default_precision(q)` when None.
        check (bool): Verify the collocation conditions after rounding.

    Raises:
        NumericalError: Newton failure, or order-condition residuals above 1e-10·q
            (generation precision too low for q).
    """
    precision_bits = _check_arguments(q, precision_bits)
    log.info(f"Generating {q}-stage Gauss-Legendre tableau at {precision_bits} bits")
    ctx = _context(precision_bits)
    roots = _roots_on_interval(ctx, q)
    c = [(1 + x) / 2 for x, _ in roots]
    b = [1 / ((1 - x * x) * d * d) for x, d in roots]

    # shifted[i][k] = P̃_k(c_i) for k = 0..q
    shifted = []
    for x, _ in roots:
        row = [ctx.mpf(1), x]
        for k in range(1, q):
            row.append(((2 * k + 1) * x * row[k] - k * row[k - 1]) / (k + 1))
        shifted.append(row)

    tails = [row[1:q] for row in shifted]
    a = np.empty((q, q))
    for i in range(q):
        integrals = [(shifted[i][k + 1] - shifted[i][k - 1]) / 2 for k in range(1, q)]
        for j in range(q):
            expansion = ctx.fdot(tails[j], integrals) if q > 1 else 0
            a[i, j] = float(b[j] * (c[i] + expansion))

    tableau = ButcherTableau(
        q=q,
        c=np.array([float(v) for v in c]),
        a=a,
        b=np.array([float(v) for v in b]),
        precision_bits=precision_bits,
    )
    if check:
        report = verify_tableau(tableau)
        tolerance = acceptance_tolerance(q)
        if report.max_order_residual > tolerance:
            raise NumericalError(
                f"order-condition residual {report.max_order_residual:.3e} exceeds {tolerance:.1e} "
                f"for q={q}; increase precision_bits above {precision_bits}"
            )
    return tableau


@dataclass
class TableauReport:
    """Maximum residuals of the Gauss–Legendre invariants."""

    q: int
    node_symmetry: float
    weight_sum: float
    row_sum: float
    order_a: float
    order_b: float
    a_symmetry: float
    min_weight: float
    nodes_increasing: bool

    @property
    def max_order_residual(self) -> float:
        return max(self.weight_sum, self.row_sum, self.order_a, self.order_b)

    def passes(self, tolerance: Optional[float] = None) -> bool:
        tolerance = acceptance_tolerance(self.q) if tolerance is None else tolerance
        return (
            self.nodes_increasing
            and self.min_weight > 0.0
            and self.node_symmetry <= tolerance
            and self.max_order_residual <= tolerance
            and self.a_symmetry <= tolerance
        )

    def as_rows(self) -> List[Tuple[str, str]]:
        return [
            ("node symmetry", f"{self.node_symmetry:.3e}"),
            ("sum b - 1", f"{self.weight_sum:.3e}"),
            ("row sums - c", f"{self.row_sum:.3e}"),
            ("order conditions (A)", f"{self.order_a:.3e}"),
            ("order conditions (b)", f"{self.order_b:.3e}"),
            ("A symmetry", f"{self.a_symmetry:.3e}"),
            ("min b", f"{self.min_weight:.3e}"),
            ("c increasing", str(self.nodes_increasing)),
        ]


def verify_tableau(tableau: ButcherTableau) -> TableauReport:
    """Evaluates every tableau invariant in 64-bit arithmetic. Never raises."""
    q, a, b, c = tableau.q, tableau.a, tableau.b, tableau.c
    powers = c[:, None] ** np.arange(q)[None, :]
    k = np.arange(1, q + 1)
    order_a = a @ powers - c[:, None] ** k[None, :] / k[None, :]
    order_b = b @ powers - 1.0 / k
    return TableauReport(
        q=q,
        node_symmetry=float(np.max(np.abs(c + c[::-1] - 1.0))),
        weight_sum=float(abs(np.sum(b) - 1.0)),
        row_sum=float(np.max(np.abs(a.sum(axis=1) - c))),
        order_a=float(np.max(np.abs(order_a))),
        order_b=float(np.max(np.abs(order_b))),
        a_symmetry=float(np.max(np.abs(a + a[::-1, ::-1] - b[None, :]))),
        min_weight=float(np.min(b)),
        nodes_increasing=bool(np.all(np.diff(c) > 0.0)),
    )


# ----------------------------------------------------------------------
# cache files
# ----------------------------------------------------------------------


def cache_path(cache_directory: Union[str, Path], q: int, precision_bits: int) -> Path:
    return Path(cache_directory) / "tableaux" / f"gauss_q{q}_p{precision_bits}.txt"


def write_tableau(path: Union[str, Path], tableau: ButcherTableau) -> Path:
    lines = [
        f"q={tableau.q} precision_bits={tableau.precision_bits}",
        " ".join(format_real(v) for v in tableau.c),
        " ".join(format_real(v) for v in tableau.b),
    ]
    lines.extend(" ".join(format_real(v) for v in row) for row in tableau.a)
    return atomic_write_text(path, "\n".join(lines) + "\n")


def _parse_row(line: str, number: int, expected: int) -> np.ndarray:
    try:
        values = [float(v) for v in line.split()]
    except ValueError as e:
        raise ParseError(f"not a row of real numbers: {e}", number) from e
    if len(values) != expected:
        raise ParseError(f"expected {expected} values, found {len(values)}", number)
    return np.array(values)


def read_tableau(path: Union[str, Path]) -> ButcherTableau:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty tableau file", 1)
    header = dict(field.split("=", 1) for field in lines[0].split() if "=" in field)
    try:
        q = int(header["q"])
        precision_bits = int(header["precision_bits"])
    except (KeyError, ValueError) as e:
        raise ParseError("header must read 'q=<q> precision_bits=<p>'", 1) from e
    if len(lines) != q + 3:
        raise ParseError(f"expected {q + 3} lines for q={q}, found {len(lines)}", len(lines))
    c = _parse_row(lines[1], 2, q)
    b = _parse_row(lines[2], 3, q)
    a = np.vstack([_parse_row(lines[3 + i], 4 + i, q) for i in range(q)])
    return ButcherTableau(q=q, c=c, a=a, b=b, precision_bits=precision_bits)


def load_or_generate(
    q: int, precision_bits: Optional[int] = None, cache_directory: Union[str, Path, None] = None
) -> ButcherTableau:
    """Returns the cached tableau for (q, precision_bits), generating and caching it on a miss."""
    precision_bits = _check_arguments(q, precision_bits)
    if cache_directory is None:
        return gauss_legendre_tableau(q, precision_bits)
    path = cache_path(cache_directory, q, precision_bits)
    if path.exists():
        log.info(f"Tableau cache hit: {path}")
        return read_tableau(path)
    tableau = gauss_legendre_tableau(q, precision_bits)
    write_tableau(path, tableau)
    log.info(f"Cached tableau at {path}")
    return tableau


# ----------------------------------------------------------------------
# classical integration
# ----------------------------------------------------------------------


def stability_function(tableau: ButcherTableau, z: complex) -> complex:
    """R(z) = 1 + z bᵀ (I − zA)⁻¹ 𝟙."""
    q = tableau.q
    system = np.eye(q) - z * tableau.a
    return complex(1.0 + z * (tableau.b @ np.linalg.solve(system, np.ones(q))))


def irk_integrate(
    tableau: ButcherTableau,
    rhs: Callable[[np.ndarray], np.ndarray],
    jacobian: Callable[[np.ndarray], np.ndarray],
    y0: Union[float, np.ndarray],
    dt: float,
    steps: int,
    tolerance: float = 1e-14,
    max_newton: int = 50,
) -> np.ndarray:
    """
    Integrates the autonomous system y' = rhs(y) with the implicit RK method.

    The stage increments Z_i = dt Σ_j a_ij rhs(y + Z_j) are solved by Newton's
    method with the full stage Jacobian.

    Returns:
        np.ndarray: The state after `steps` steps.
    """
    q = tableau.q
    y = np.atleast_1d(np.asarray(y0, dtype=np.float64)).copy()
    m = y.size
    identity = np.eye(q * m)
    a_kron = np.kron(tableau.a, np.eye(m))
    for step in range(steps):
        z = np.zeros((q, m))
        for _ in range(max_newton):
            stages = y[None, :] + z
            f = np.array([np.atleast_1d(rhs(s)) for s in stages])
            residual = z.ravel() - dt * a_kron @ f.ravel()
            blocks = np.zeros((q * m, q * m))
            for j in range(q):
                blocks[j * m : (j + 1) * m, j * m : (j + 1) * m] = np.atleast_2d(jacobian(stages[j]))
            update = np.linalg.solve(identity - dt * a_kron @ blocks, residual)
            z -= update.reshape(q, m)
            if np.linalg.norm(update) <= tolerance * max(1.0, np.linalg.norm(z)):
                break
        else:
            raise NumericalError(f"Newton solve of the stage equations failed at step {step}")
        f = np.array([np.atleast_1d(rhs(s)) for s in y[None, :] + z])
        y = y + dt * (tableau.b @ f)
    return y
