# src/helpers.py

"""
Helpers Module
--------------
Small utilities shared across the solver, I/O and CLI modules.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence, Union

import numpy as np

from .custom_logger import log


def format_real(value: float) -> str:
    """
    Formats a 64-bit real with 17 significant digits (lossless round trip).

    Args:
        value (float): The value to format.

    Returns:
        str: Decimal text that parses back to the identical double.
    """
    return "%.17g" % float(value)


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """
    Writes text to a file through a temporary file and an atomic rename.

    Args:
        path (Union[str, Path]): Destination path.
        text (str): File contents.

    Returns:
        Path: The destination path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    log.debug(f"Wrote {path}")
    return path


def settings_hash(settings: Mapping[str, Any]) -> str:
    """
    Returns a stable SHA-256 hex digest of a settings mapping (key order independent).
    """
    payload = json.dumps(settings, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def finite_difference_gradient(
    fun: Callable[[np.ndarray], float], x: Sequence[float], step: float = 1e-6
) -> np.ndarray:
    """
    Central-difference gradient of a scalar function.

    Args:
        fun (Callable[[np.ndarray], float]): Scalar function of a flat vector.
        x (Sequence[float]): Evaluation point.
        step (float): Difference step.

    Returns:
        np.ndarray: Approximate gradient.
    """
    x = np.array(x, dtype=np.float64)
    gradient = np.empty_like(x)
    for k in range(x.size):
        forward = x.copy()
        backward = x.copy()
        forward[k] += step
        backward[k] -= step
        gradient[k] = (fun(forward) - fun(backward)) / (2.0 * step)
    return gradient


def relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    """Relative 2-norm difference ‖a − b‖ / max(‖b‖, tiny)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
