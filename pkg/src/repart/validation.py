"""Input checks shared by the estimator layer and the CLI."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.utils import check_array

from .core import as_fraction
from .errors import BadParameters


def check_edges(X, n: int | None = None) -> np.ndarray:
    """Return ``X`` as an ``(m, 2)`` integer array of vertex pairs."""
    arr = np.asarray(X)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    arr = check_array(arr, dtype=None, ensure_2d=True)
    if arr.shape[1] != 2:
        raise BadParameters(f"edges must have two columns, got {arr.shape[1]}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise BadParameters("edge endpoints must be integers")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or (n is not None and arr.max() >= n):
        raise BadParameters("edge endpoint out of range")
    return arr


def check_initial(initial, n_servers: int) -> tuple[int, ...]:
    arr = np.asarray(initial)
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise BadParameters("initial assignment must be a 1-d integer array")
    if arr.size and (arr.min() < 0 or arr.max() >= n_servers):
        raise BadParameters("initial assignment references an unknown server")
    return tuple(int(s) for s in arr)


def check_rational(value, name: str) -> Fraction:
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise BadParameters(f"{name} must be an exact rational, got {value!r}") from exc


def block_initial(n: int, n_servers: int) -> tuple[int, ...]:
    """Contiguous blocks: vertex ``v`` on server ``v // (n / n_servers)``."""
    if n % n_servers:
        raise BadParameters("number of servers must divide n")
    b = n // n_servers
    return tuple(v // b for v in range(n))
