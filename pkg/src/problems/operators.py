# src/problems/operators.py

"""
PDE right-hand sides shared by the continuous- and discrete-time models.

The functions use plain arithmetic, so they accept graph Variables, floats
and NumPy arrays alike.
"""

import math

from ..autodiff import Variable, abs2

BURGERS_NU = 0.01 / math.pi
ALLEN_CAHN_DIFFUSION = 1e-4


def burgers_operator(u, u_x, u_xx):
    """N[u] = u u_x − (0.01/π) u_xx."""
    return u * u_x - BURGERS_NU * u_xx


def burgers_residual(u, u_t, u_x, u_xx):
    """f = u_t + u u_x − (0.01/π) u_xx."""
    return u_t + burgers_operator(u, u_x, u_xx)


def schrodinger_residual(u, v, u_t, v_t, u_xx, v_xx):
    """
    Real and imaginary parts of i h_t + 0.5 h_xx + |h|² h for h = u + iv.

    Returns:
        Tuple: (−v_t + 0.5 u_xx + |h|² u, u_t + 0.5 v_xx + |h|² v)
    """
    modulus = abs2(u, v) if isinstance(u, Variable) or isinstance(v, Variable) else u * u + v * v
    return -v_t + 0.5 * u_xx + modulus * u, u_t + 0.5 * v_xx + modulus * v


def allen_cahn_operator(u, u_xx):
    """N[u] = −0.0001 u_xx + 5u³ − 5u."""
    return -ALLEN_CAHN_DIFFUSION * u_xx + 5.0 * u**3 - 5.0 * u
