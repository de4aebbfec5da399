"""Cayley-Dickson algebras and the cross products on R^3 and R^7."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def conjugate(x: np.ndarray) -> np.ndarray:
    out = -np.asarray(x, dtype=float)
    out[..., 0] = -out[..., 0]
    return out


def cd_multiply(x, y) -> np.ndarray:
    """Product in the 2^k-dimensional Cayley-Dickson algebra.

    Uses (a, b)(c, d) = (ac - d*b, da + bc*) recursively down to the reals.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    size = x.shape[-1]
    if size == 1:
        return x * y
    h = size // 2
    a, b = x[..., :h], x[..., h:]
    c, d = y[..., :h], y[..., h:]
    first = cd_multiply(a, c) - cd_multiply(conjugate(d), b)
    second = cd_multiply(d, a) + cd_multiply(b, conjugate(c))
    return np.concatenate([first, second], axis=-1)


@lru_cache(maxsize=None)
def _table(dim: int) -> np.ndarray:
    size = dim + 1
    if size & (size - 1):
        raise ValueError("cross products exist on R^3 and R^7 only")
    C = np.zeros((dim, dim, dim))
    eye = np.eye(size)
    for a in range(dim):
        for b in range(dim):
            if a == b:
                continue
            prod = cd_multiply(eye[a + 1], eye[b + 1])
            C[a, b] = prod[1:]
    C.setflags(write=False)
    return C


def cross_table(dim: int = 7) -> np.ndarray:
    """Structure constants C with (u x v)_c = sum_ab C[a, b, c] u_a v_b.

    ``dim`` is 3 (imaginary quaternions) or 7 (imaginary octonions).
    """
    return _table(dim)


def cross(u, v) -> np.ndarray:
    """Cross product of imaginary quaternions (len 3) or octonions (len 7)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.einsum("abc,...a,...b->...c", cross_table(u.shape[-1]), u, v)
