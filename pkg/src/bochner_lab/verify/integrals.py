"""Global inner products of forms over a quadrature grid."""
from __future__ import annotations

import numpy as np

from .. import jcalc
from ..geometry import ChartGeometry, orthonormal_frame
from ..geometry.quadrature import QuadratureGrid


class GridMismatchError(ValueError):
    pass


def global_inner(spec, omega, theta, grid: QuadratureGrid, block_size: int = 4096) -> float:
    """(omega, theta) = sum over nodes of w * <omega, theta>.

    ``omega`` and ``theta`` build a TBForm from a ChartGeometry (forms are
    given per chart, so they are rebuilt on every block); ``None`` stands
    for the zero form.
    """
    if grid.spec is not spec and grid.spec.name != spec.name:
        raise GridMismatchError(f"grid built for {grid.spec.name!r}, not {spec.name!r}")
    if omega is None or theta is None:
        return 0.0
    total = 0.0
    for blk in grid.blocks(block_size):
        geom = ChartGeometry(spec, spec.charts[blk.chart], blk.x)
        a, b = omega(geom), theta(geom)
        E = orthonormal_frame(geom.values(geom.metric))
        total += float(np.sum(blk.w * jcalc.pointwise_inner(geom, a, b, E)))
    return total
