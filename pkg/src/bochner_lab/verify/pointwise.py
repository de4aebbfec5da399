"""Pointwise scalars of an almost complex structure at batches of nodes.

Everything frame-dependent is computed from frame components, so the
same code serves the frame-rotation check: pass a rotated frame and every
reported scalar must come out the same.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .. import jcalc
from ..geometry import ChartGeometry, NodeBlock, build_grid, orthonormal_frame, random_rotation, sample_points
from ..geometry.charts import ManifoldSpec

HEAVY = (
    "e",
    "grad2",
    "dJ2",
    "deltaJ2",
    "lapJ_J",
    "lapJ2",
    "T1",
    "T2",
    "S",
    "hess_e",
    "bochner_residual",
    "weitzenbock_residual",
    "N2",
    "N12",
    "J2_residual",
    "compat_residual",
    "harmonic_integrable_residual",
    "codiff_J",
    "codiff_energy",
    "nijenhuis_trace",
    "codiff_kahler_form",
)
BOCHNER_ONLY = ("e", "grad2", "T1", "T2", "S", "J2_residual", "compat_residual")
ENERGY_ONLY = ("e", "J2_residual", "compat_residual")

COMPATIBLE_TOL = 1e-8


def block_rng(seed: int, name: str, index: int, stream: int = 0) -> np.random.Generator:
    """Generator keyed on (seed, manifold, stream, block) so results do not depend on run order."""
    return np.random.default_rng([seed, zlib.crc32(name.encode()), stream, index])


def unit_ball(rng: np.random.Generator, shape, d: int) -> np.ndarray:
    v = rng.normal(size=tuple(shape) + (d,))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    r = rng.random(tuple(shape) + (1,)) ** (1.0 / d)
    return v * r


@dataclass
class NodeValues:
    """Per-node scalars for one manifold, concatenated over blocks."""

    spec: ManifoldSpec
    resolution: int
    chart: np.ndarray
    x: np.ndarray
    w: np.ndarray
    extra: np.ndarray
    data: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    @property
    def quad(self) -> np.ndarray:
        return ~self.extra

    def integral(self, key) -> float:
        q = self.quad
        return float(np.sum(self.w[q] * self.data[key][q]))

    @property
    def volume(self) -> float:
        return float(np.sum(self.w[self.quad]))

    def maxabs(self, key) -> float:
        v = self.data[key]
        return float(np.max(np.abs(v))) if v.size else 0.0

    @property
    def compatible(self) -> bool:
        return self.maxabs("compat_residual") <= COMPATIBLE_TOL


def evaluate_points(spec, chart_index, x, rng, quantities=HEAVY, n_random=20, rotate=False):
    """Scalars at chart points; returns a dict of (P,) arrays."""
    chart = spec.charts[chart_index]
    geom = ChartGeometry(spec, chart, x)
    J = spec.structure.build(geom)
    n = geom.n
    P = len(x)
    g = geom.values(geom.metric)
    E = orthonormal_frame(g)
    if rotate:
        E = E @ random_rotation(rng, n, (P,))
    Jv = J.value
    Jf = jcalc.frame_endomorphism(Jv, E)
    out = {
        "e": 0.5 * np.sum(Jf**2, axis=(1, 2)),
        "J2_residual": np.max(np.abs(Jv @ Jv + np.eye(n)), axis=(1, 2)),
        "compat_residual": np.max(np.abs(np.swapaxes(Jf, 1, 2) @ Jf - np.eye(n)), axis=(1, 2)),
    }
    if quantities is ENERGY_ONLY:
        return out

    w = jcalc.TBForm(J, 1)
    D = jcalc.nabla(geom, w)
    Rf = jcalc.frame_riemann(geom.values(geom.riemann), E)
    out["grad2"] = jcalc.nabla_norm2(D.value, E)
    out["T1"], out["T2"], out["S"] = jcalc.curvature_traces(Rf, Jf)
    if quantities is BOCHNER_ONLY:
        return out

    dJ = jcalc.exterior_d(geom, w)
    dl = jcalc.codifferential(geom, w)
    lap = jcalc.hodge_laplace(geom, w)
    rough = jcalc.rough_laplacian(geom, w)
    curv = jcalc.weitzenbock_term(geom, w)
    dJv, dlv, lapv = dJ.field.value, dl.field.value, lap.field.value
    out["dJ2"] = jcalc.inner_values(dJv, dJv, E, 2, 1)
    out["deltaJ2"] = jcalc.inner_values(dlv, dlv, E, 0, 1)
    out["lapJ_J"] = jcalc.inner_values(lapv, Jv, E, 1, 1)
    out["lapJ2"] = jcalc.inner_values(lapv, lapv, E, 1, 1)
    hess = jcalc.trace_hessian(geom, jcalc.energy_density(geom, J)).value
    out["hess_e"] = hess
    out["bochner_residual"] = np.abs(hess + out["lapJ_J"] - (out["grad2"] + out["T1"] - out["T2"]))
    weitz = lapv - (-rough.field.value + curv.field.value)
    out["weitzenbock_residual"] = np.max(np.abs(weitz.reshape(P, -1)), axis=1)

    N = jcalc.nijenhuis_tensor(geom, J).value
    Nf = jcalc.frame_components(N, E, 1)
    out["N2"] = jcalc.inner_values(N, N, E, 2, 1)
    out["N12"] = np.linalg.norm(Nf[:, :, 0, 1], axis=1)
    dJf = jcalc.frame_components(dJv, E, 1)
    dlf = jcalc.frame_components(dlv, E, 1)

    X = unit_ball(rng, (P, n_random), n)
    Y = unit_ball(rng, (P, n_random), n)
    JX = np.einsum("pkm,prm->prk", Jf, X)
    JY = np.einsum("pkm,prm->prk", Jf, Y)
    dXY = np.einsum("pkab,pra,prb->prk", dJf, X, Y)
    dJXJY = np.einsum("pkab,pra,prb->prk", dJf, JX, JY)
    NXY = np.einsum("pkab,pra,prb->prk", Nf, X, Y)
    JN = np.einsum("pkm,prm->prk", Jf, NXY)
    out["harmonic_integrable_residual"] = np.max(np.linalg.norm(dXY - dJXJY + JN, axis=2), axis=1)

    nan = np.full(P, np.nan)
    compatible = np.max(out["compat_residual"]) <= COMPATIBLE_TOL
    if not compatible:
        for key in ("codiff_J", "codiff_energy", "nijenhuis_trace", "codiff_kahler_form"):
            out[key] = nan
        return out
    # sum_i dJ(X, e_i) paired against J e_i and against e_i
    dX_J = np.einsum("pkai,pra,pki->pr", dJf, X, Jf)
    dX_e = np.einsum("piai,pra->pr", dJf, X)
    out["codiff_J"] = np.max(np.abs(np.einsum("prk,pk->pr", JX, dlf) + dX_J), axis=1)
    out["codiff_energy"] = np.max(np.abs(np.einsum("prk,pk->pr", X, dlf) + dX_e), axis=1)
    out["nijenhuis_trace"] = np.max(np.abs(np.einsum("piai,pra->pr", Nf, X)), axis=1)
    _, domega = jcalc.hermitian_form(geom, J)
    dof = jcalc.frame_components(domega.field.value, E, 0)
    out["codiff_kahler_form"] = np.max(np.abs(np.einsum("pa,pra->pr", dof, X) + np.einsum("prk,pk->pr", X, dlf)), axis=1)
    return out


def evaluate(
    spec: ManifoldSpec,
    resolution: int | None = None,
    seed: int = 0,
    quantities=HEAVY,
    extra: int = 100,
    rotate: bool = False,
    block_size: int = 1024,
) -> NodeValues:
    """Scalars at every quadrature node plus ``extra`` uniform sample points."""
    grid = build_grid(spec, resolution)
    blocks = list(grid.blocks(block_size))
    n_quad = sum(len(b) for b in blocks)
    if extra:
        blocks += sample_points(spec, extra, block_rng(seed, spec.name, 0, stream=1))
    parts = [
        evaluate_points(spec, blk.chart, blk.x, block_rng(seed, spec.name, i), quantities, rotate=rotate)
        for i, blk in enumerate(blocks)
    ]
    chart = np.concatenate([np.full(len(b), b.chart) for b in blocks])
    x = np.concatenate([b.x for b in blocks])
    w = np.concatenate([b.w for b in blocks])
    is_extra = np.arange(len(chart)) >= n_quad
    data = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return NodeValues(spec, grid.resolution, chart, x, w, is_extra, data)


__all__ = ["NodeValues", "NodeBlock", "evaluate", "evaluate_points", "block_rng", "unit_ball", "HEAVY", "BOCHNER_ONLY", "ENERGY_ONLY"]
