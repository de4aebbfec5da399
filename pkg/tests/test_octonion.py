import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bochner_lab.geometry.octonion import cd_multiply, conjugate, cross, cross_table

vec7 = arrays(np.float64, 7, elements=st.floats(-2, 2))
oct8 = arrays(np.float64, 8, elements=st.floats(-2, 2))


@settings(max_examples=200, deadline=None)
@given(oct8, oct8)
def test_octonion_norm_is_multiplicative(x, y):
    assert np.linalg.norm(cd_multiply(x, y)) == pytest.approx(np.linalg.norm(x) * np.linalg.norm(y), rel=1e-10, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(oct8, oct8)
def test_octonions_are_alternative(x, y):
    np.testing.assert_allclose(cd_multiply(cd_multiply(x, x), y), cd_multiply(x, cd_multiply(x, y)), atol=1e-9)
    np.testing.assert_allclose(cd_multiply(cd_multiply(y, x), x), cd_multiply(y, cd_multiply(x, x)), atol=1e-9)


def test_octonions_are_not_associative():
    e = np.eye(8)
    lhs = cd_multiply(cd_multiply(e[1], e[2]), e[4])
    rhs = cd_multiply(e[1], cd_multiply(e[2], e[4]))
    assert not np.allclose(lhs, rhs)


def test_conjugate_gives_norm():
    x = np.arange(1.0, 9.0)
    np.testing.assert_allclose(cd_multiply(x, conjugate(x)), np.r_[x @ x, np.zeros(7)], atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(vec7, vec7)
def test_cross_product_identities(u, v):
    w = cross(u, v)
    np.testing.assert_allclose(w, -cross(v, u), atol=1e-12)
    assert w @ u == pytest.approx(0.0, abs=1e-9)
    assert w @ v == pytest.approx(0.0, abs=1e-9)
    assert w @ w == pytest.approx((u @ u) * (v @ v) - (u @ v) ** 2, rel=1e-9, abs=1e-9)
    np.testing.assert_allclose(cross(u, w), -(u @ u) * v + (u @ v) * u, atol=1e-8)


def test_cross_table_is_totally_antisymmetric():
    C = cross_table(7)
    np.testing.assert_array_equal(C, -np.transpose(C, (1, 0, 2)))
    np.testing.assert_array_equal(C, -np.transpose(C, (0, 2, 1)))
    # each unit pair spans exactly one third unit vector
    assert np.all(np.abs(C).sum(axis=2)[~np.eye(7, dtype=bool)] == 1)


def test_three_dimensional_cross_is_the_usual_one():
    rng = np.random.default_rng(0)
    u, v = rng.normal(size=(2, 3))
    np.testing.assert_allclose(cross(u, v), np.cross(u, v), atol=1e-14)


def test_cross_needs_dimension_three_or_seven():
    with pytest.raises(ValueError):
        cross_table(5)
