"""Matrix permanents by Glynn's formula in Gray-code order."""

from __future__ import annotations

import numpy as np

MAX_PERMANENT_SIZE = 12


class PermanentError(ValueError):
    pass


def _gray_flips(n: int) -> list[int]:
    """Row index (1..n-1) whose sign flips at each Gray-code step."""
    return [((k & -k).bit_length()) for k in range(1, 1 << (n - 1))]


def permanents(mats, max_size: int = MAX_PERMANENT_SIZE) -> np.ndarray:
    """Permanents of a stack of ``n x n`` matrices, shape ``(..., n, n)``.

    Runs the Gray-code Glynn recurrence once, vectorized over the stack; each
    entry costs ``O(2^(n-1) n)`` and the summation order is fixed.
    """
    a = np.asarray(mats, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise PermanentError(f"expected square matrices, got shape {a.shape}")
    n = a.shape[-1]
    if n > max_size:
        raise PermanentError(f"permanent size {n} exceeds the limit {max_size}")
    batch = a.shape[:-2]
    if n == 0:
        return np.ones(batch, dtype=complex)
    a = a.reshape((-1, n, n))
    rows = a.sum(axis=1)  # delta = all +1
    total = rows.prod(axis=1)
    delta = np.ones(n)
    sign = 1.0
    for i in _gray_flips(n):
        delta[i] = -delta[i]
        rows = rows + (2 * delta[i]) * a[:, i, :]
        sign = -sign
        total = total + sign * rows.prod(axis=1)
    return (total / (1 << (n - 1))).reshape(batch)


def permanent(mat, max_size: int = MAX_PERMANENT_SIZE) -> complex:
    a = np.asarray(mat, dtype=complex)
    if a.ndim != 2:
        raise PermanentError(f"expected a matrix, got shape {a.shape}")
    return complex(permanents(a, max_size))
