"""Quadrature grids whose weights carry the full Riemannian volume element."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..expr import compile_exprs
from .charts import ManifoldSpec
from .frames import DegenerateMetricError


class AtlasError(ValueError):
    """A quadrature node is not inside any chart's usable region."""


@dataclass(frozen=True)
class NodeBlock:
    chart: int
    x: np.ndarray  # (P, d) chart coordinates
    w: np.ndarray  # (P,) weights including the volume element

    def __len__(self):
        return len(self.w)


def sphere_volume(d: int) -> float:
    return 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


def _gl_on_interval(n: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w


class QuadratureGrid:
    """Nodes grouped by chart, generated lazily in blocks.

    Large product grids never exist in memory at once: ``blocks()`` yields
    one block per outer angle (spheres) or per outer coordinate (boxes).
    """

    def __init__(self, spec: ManifoldSpec, resolution: int):
        if resolution < 2:
            raise ValueError("resolution must be at least 2")
        self.spec = spec
        self.resolution = resolution
        self._metric_fns = {}

    @property
    def kind(self) -> str:
        return self.spec.quadrature

    @property
    def size(self) -> int:
        N, d = self.resolution, self.spec.dim
        if self.kind == "sphere":
            return N ** (d - 1) * 2 * N
        return N**d

    def blocks(self, max_nodes: int = 200_000):
        gen = self._sphere_blocks() if self.kind == "sphere" else self._box_blocks()
        for blk in gen:
            for start in range(0, len(blk), max_nodes):
                sl = slice(start, start + max_nodes)
                yield NodeBlock(blk.chart, blk.x[sl], blk.w[sl])

    def total_weight(self) -> float:
        total = 0.0
        for blk in self.blocks():
            total += float(np.sum(blk.w))
        return total

    # ------------------------------------------------------------- spheres
    def _sphere_angles(self):
        N, d = self.resolution, self.spec.dim
        polar = []
        for k in range(d - 1):
            t, w = _gl_on_interval(N, 0.0, math.pi)
            polar.append((t, w * np.sin(t) ** (d - 1 - k)))
        M = 2 * N
        phi = 2 * math.pi * np.arange(M) / M
        wphi = np.full(M, 2 * math.pi / M)
        return polar, (phi, wphi)

    def _sphere_blocks(self):
        d = self.spec.dim
        polar, (phi, wphi) = self._sphere_angles()
        charts = self.spec.charts
        roles = {c.projection: i for i, c in enumerate(charts)}
        if "stereographic-north" not in roles or "stereographic-south" not in roles:
            raise AtlasError("sphere quadrature needs stereographic-north and stereographic-south charts")
        rest = polar[1:] + [(phi, wphi)]
        grids = np.meshgrid(*[r[0] for r in rest], indexing="ij")
        wgrids = np.meshgrid(*[r[1] for r in rest], indexing="ij")
        inner_angles = [g.ravel() for g in grids]
        inner_w = np.prod([g.ravel() for g in wgrids], axis=0)
        t1, w1 = polar[0]
        for a, wa in zip(t1, w1):
            angles = [np.full(inner_w.shape, a)] + inner_angles
            p = _hyperspherical(angles, d)
            w = wa * inner_w
            south = p[:, -1] <= 0.0  # southern hemisphere -> chart projected from the north pole
            for mask, role in ((south, "stereographic-north"), (~south, "stereographic-south")):
                if not np.any(mask):
                    continue
                ci = roles[role]
                chart = charts[ci]
                x = chart.project(p[mask])
                if not np.all(chart.usable(x)):
                    raise AtlasError(f"node outside usable region of chart {chart.name}")
                wm = w[mask] * self._conformal_density(ci, x)
                yield NodeBlock(ci, x, wm)

    def _conformal_density(self, ci: int, x: np.ndarray) -> np.ndarray:
        if self.spec.conformal is None:
            return np.ones(len(x))
        chart = self.spec.charts[ci]
        fn = compile_exprs([self.spec.conformal_in(chart)], chart.coords)
        c = fn(*x.T)[0]
        if np.any(c <= 0):
            raise DegenerateMetricError("conformal factor is not positive on the grid")
        return c ** (self.spec.dim / 2)

    # --------------------------------------------------------------- boxes
    def _box_blocks(self):
        if len(self.spec.charts) != 1:
            raise AtlasError("box quadrature needs a single chart")
        chart = self.spec.charts[0]
        N = self.resolution
        rules = []
        for lo, hi in chart.domain:
            if chart.periodic:
                t = lo + (hi - lo) * np.arange(N) / N
                w = np.full(N, (hi - lo) / N)
            else:
                t, w = _gl_on_interval(N, lo, hi)
            rules.append((t, w))
        inner = rules[1:]
        grids = np.meshgrid(*[r[0] for r in inner], indexing="ij")
        wgrids = np.meshgrid(*[r[1] for r in inner], indexing="ij")
        inner_x = np.stack([g.ravel() for g in grids], axis=1) if inner else np.zeros((1, 0))
        inner_w = np.prod([g.ravel() for g in wgrids], axis=0) if inner else np.ones(1)
        for a, wa in zip(*rules[0]):
            x = np.concatenate([np.full((len(inner_w), 1), a), inner_x], axis=1)
            yield NodeBlock(0, x, wa * inner_w * self._volume_density(0, x))

    def _volume_density(self, ci: int, x: np.ndarray) -> np.ndarray:
        from .context import ChartGeometry

        geom = ChartGeometry(self.spec, self.spec.charts[ci], x)
        g = geom.values(geom.metric)
        det = np.linalg.det(g)
        if np.any(det <= 0):
            raise DegenerateMetricError("metric is degenerate at a quadrature node")
        return np.sqrt(det)


def _hyperspherical(angles, d: int) -> np.ndarray:
    """Points of S^d from d-1 polar angles and one azimuth."""
    P = len(angles[0])
    p = np.empty((P, d + 1))
    s = np.ones(P)
    for k in range(d - 1):
        p[:, k] = s * np.cos(angles[k])
        s = s * np.sin(angles[k])
    p[:, d - 1] = s * np.cos(angles[d - 1])
    p[:, d] = s * np.sin(angles[d - 1])
    return p


def build_grid(spec: ManifoldSpec, resolution: int | None = None) -> QuadratureGrid:
    return QuadratureGrid(spec, resolution or spec.resolution)


def sample_points(spec: ManifoldSpec, count: int, rng: np.random.Generator):
    """Uniformly distributed extra points as NodeBlocks with zero weight."""
    if spec.quadrature == "sphere":
        p = rng.normal(size=(count, spec.dim + 1))
        p /= np.linalg.norm(p, axis=1, keepdims=True)
        roles = {c.projection: i for i, c in enumerate(spec.charts)}
        south = p[:, -1] <= 0.0
        out = []
        for mask, role in ((south, "stereographic-north"), (~south, "stereographic-south")):
            if np.any(mask):
                ci = roles[role]
                x = spec.charts[ci].project(p[mask])
                out.append(NodeBlock(ci, x, np.zeros(len(x))))
        return out
    chart = spec.charts[0]
    lo = np.array([a for a, _ in chart.domain]) + chart.margin
    hi = np.array([b for _, b in chart.domain]) - chart.margin
    x = lo + (hi - lo) * rng.random((count, spec.dim))
    return [NodeBlock(0, x, np.zeros(count))]


__all__ = ["AtlasError", "NodeBlock", "QuadratureGrid", "build_grid", "sample_points", "sphere_volume"]
