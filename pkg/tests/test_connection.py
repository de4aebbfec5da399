import numpy as np
import pytest

from bochner_lab.connection import (
    christoffel,
    metric_compatibility_residual,
    riemann,
    riemann_apply,
    scalar_curvature,
)
from bochner_lab.geometry.context import ChartGeometry
from bochner_lab.geometry.quadrature import sample_points
from bochner_lab.geometry.zoo import flat_torus, round_sphere, round_sphere_2, s6_perturbed
from bochner_lab.tensor import Sym


def geometries(spec, count=8, seed=5, **kw):
    for blk in sample_points(spec, count, np.random.default_rng(seed)):
        yield ChartGeometry(spec, spec.charts[blk.chart], blk.x, **kw)


CURVED = [round_sphere_2(), round_sphere(4), s6_perturbed(0.2)]


@pytest.mark.parametrize("spec", CURVED, ids=lambda s: s.name)
def test_riemann_symmetries_and_first_bianchi(spec):
    for geom in geometries(spec):
        Rm = geom.values(geom.riemann)
        g = geom.values(geom.metric)
        low = np.einsum("pml,plkij->pmkij", g, Rm)  # R_{mkij}
        np.testing.assert_allclose(low, -np.swapaxes(low, 3, 4), atol=1e-10)
        np.testing.assert_allclose(low, -np.swapaxes(low, 1, 2), atol=1e-10)
        np.testing.assert_allclose(low, np.transpose(low, (0, 3, 4, 1, 2)), atol=1e-10)
        cyc = Rm + np.transpose(Rm, (0, 1, 3, 4, 2)) + np.transpose(Rm, (0, 1, 4, 2, 3))
        np.testing.assert_allclose(cyc, 0.0, atol=1e-10)


@pytest.mark.parametrize("d", [2, 4, 6])
def test_round_sphere_curvature(d):
    """Unit sphere: <R(X, Y)X, Y> = |X|^2|Y|^2 - <X, Y>^2 and scalar curvature d(d - 1)."""
    spec = round_sphere(d)
    rng = np.random.default_rng(0)
    for geom in geometries(spec, count=4):
        Rm = geom.values(geom.riemann)
        g = geom.values(geom.metric)
        s = geom.values(scalar_curvature(geom.riemann, geom.metric_inverse))
        np.testing.assert_allclose(s, d * (d - 1), rtol=1e-11)
        X, Y = rng.normal(size=(2, geom.npoints, d))
        RXYX = riemann_apply(Rm, X, Y, X)
        lhs = np.einsum("pi,pij,pj->p", RXYX, g, Y)
        gxx, gyy, gxy = (np.einsum("pi,pij,pj->p", a, g, b) for a, b in ((X, X), (Y, Y), (X, Y)))
        np.testing.assert_allclose(lhs, gxx * gyy - gxy**2, rtol=1e-10)


def test_flat_torus_curvature_vanishes():
    for geom in geometries(flat_torus(2)):
        assert np.max(np.abs(geom.values(geom.christoffel))) < 1e-14
        assert np.max(np.abs(geom.values(geom.riemann))) < 1e-14


def test_sphere_christoffel_matches_finite_differences():
    """Gamma from the closed form against central differences of the metric."""
    spec = round_sphere_2()
    chart = spec.charts[0]
    x0 = np.array([[0.31, -0.47]])
    h = 1e-5
    gamma = ChartGeometry(spec, chart, x0).values(ChartGeometry(spec, chart, x0).christoffel)[0]

    def metric(x):
        geom = ChartGeometry(spec, chart, x[None])
        return geom.values(geom.metric)[0]

    dg = np.empty((2, 2, 2))  # dg[i, j, a] = d_a g_ij
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        dg[:, :, a] = (metric(x0[0] + e) - metric(x0[0] - e)) / (2 * h)
    ginv = np.linalg.inv(metric(x0[0]))
    fd = 0.5 * (
        np.einsum("kl,jli->kij", ginv, dg) + np.einsum("kl,ilj->kij", ginv, dg) - np.einsum("kl,ijl->kij", ginv, dg)
    )
    np.testing.assert_allclose(gamma, fd, atol=1e-8)


@pytest.mark.parametrize("spec", CURVED, ids=lambda s: s.name)
def test_conformal_shortcut_agrees_with_general_formula(spec):
    for fast, plain in zip(geometries(spec), geometries(spec, use_conformal_shortcut=False)):
        np.testing.assert_allclose(fast.values(fast.christoffel), plain.values(plain.christoffel), atol=1e-11)
        np.testing.assert_allclose(fast.values(fast.riemann), plain.values(plain.riemann), atol=1e-9)


def test_symbolic_and_numeric_christoffel_agree():
    spec = round_sphere_2()
    for num in geometries(spec, count=6):
        sym = ChartGeometry(spec, num.chart)
        assert isinstance(sym.christoffel, Sym)
        np.testing.assert_allclose(sym.christoffel.evaluate(num.points), num.values(num.christoffel), atol=1e-12)
        np.testing.assert_allclose(sym.riemann.evaluate(num.points), num.values(num.riemann), atol=1e-10)


@pytest.mark.parametrize("spec", CURVED, ids=lambda s: s.name)
def test_levi_civita_is_metric_compatible(spec):
    for geom in geometries(spec, count=4):
        res = geom.values(metric_compatibility_residual(geom.metric, geom.christoffel))
        assert np.max(np.abs(res)) < 1e-11


def test_christoffel_is_torsion_free():
    for geom in geometries(s6_perturbed(0.3), count=4):
        G = geom.values(christoffel(geom.metric, geom.metric_inverse))
        np.testing.assert_allclose(G, np.swapaxes(G, 2, 3), atol=1e-14)
        np.testing.assert_allclose(geom.values(riemann(geom.christoffel)), geom.values(geom.riemann), atol=0)
