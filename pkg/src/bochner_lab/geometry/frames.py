"""Orthonormal frames at points."""
from __future__ import annotations

import numpy as np


class DegenerateMetricError(ValueError):
    pass


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Gram-Schmidt of the coordinate basis in index order.

    ``g`` has shape (..., d, d); the result E has the frame vectors as
    columns, so E^T g E = I.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[-1]
    E = np.zeros(g.shape)
    for i in range(d):
        v = np.zeros(g.shape[:-1])
        v[..., i] = 1.0
        for j in range(i):
            ej = E[..., :, j]
            proj = np.einsum("...a,...ab,...b->...", v, g, ej)
            v = v - proj[..., None] * ej
        norm2 = np.einsum("...a,...ab,...b->...", v, g, v)
        if np.any(~(norm2 > 0)):
            raise DegenerateMetricError("metric is not positive definite at some point")
        E[..., :, i] = v / np.sqrt(norm2)[..., None]
    return E


def random_rotation(rng: np.random.Generator, d: int, batch=()) -> np.ndarray:
    """Haar-random orthogonal matrices of shape (*batch, d, d)."""
    a = rng.normal(size=tuple(batch) + (d, d))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    return q * signs[..., None, :]
