"""Definitions of endomorphism fields (almost complex structures, test forms).

A definition is turned into a concrete field on a chart by ``build(geom)``,
where ``geom`` is a :class:`ChartGeometry`.  Because every definition goes
through the same chart object, the symbolic and jet routes see the same
field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..expr import Const, Expr, parse
from ..tensor import ein
from .octonion import cross_table


def _as_expr_array(rows) -> np.ndarray:
    arr = np.array(rows, dtype=object)
    flat = arr.ravel()
    for i, e in enumerate(flat):
        if isinstance(e, str):
            flat[i] = parse(e)
        elif not isinstance(e, Expr):
            flat[i] = Const(float(e))
    return arr


@dataclass(frozen=True)
class ChartComponents:
    """Explicit components per chart: an (n, n, ..., n) array of expressions."""

    components: Mapping[str, np.ndarray]
    label: str = "explicit"
    degree: int = 1

    @classmethod
    def uniform(cls, rows, chart_names, label="explicit", degree=1):
        arr = _as_expr_array(rows)
        return cls({name: arr for name in chart_names}, label, degree)

    def build(self, geom):
        return geom.field(_as_expr_array(self.components[geom.chart.name]))

    @property
    def tag(self):
        return self.label


@dataclass(frozen=True)
class AmbientEndomorphism:
    """Tangential part of an ambient matrix field given in X1..XN."""

    matrix: np.ndarray
    label: str = "ambient"
    degree: int = 1

    def build(self, geom):
        A = geom.ambient_field(_as_expr_array(self.matrix), geom.EMBEDDING_ORDER - 1)
        return geom.pullback_endomorphism(A)

    @property
    def tag(self):
        return self.label


@dataclass(frozen=True)
class CrossProductStructure:
    """J_p(v) = p x v on the unit sphere in R^3 or R^7."""

    label: str = "embedded-cross-product"
    degree: int = 1

    def build(self, geom):
        F = geom.embedding.truncate(geom.EMBEDDING_ORDER - 1) if hasattr(geom.embedding, "truncate") else geom.embedding
        C = cross_table(geom.chart.ambient_dim)
        M = ein("abc,a->cb", C, F)  # (p x w)_c = M[c, b] w_b
        return geom.pullback_endomorphism(M)

    @property
    def tag(self):
        return self.label


@dataclass(frozen=True)
class ConjugatedStructure:
    """J = A J0 A^{-1} with A = id + eps * B."""

    base: object
    perturbation: object
    eps: float
    label: str = "conjugated"
    degree: int = 1

    def build(self, geom):
        J0 = self.base.build(geom)
        B = self.perturbation.build(geom)
        A = B * self.eps + np.eye(geom.n)
        return ein("ij,jk,kl->il", A, J0, A.inv())

    @property
    def tag(self):
        return self.label


def structure_from_tag(tag: str):
    if tag == "embedded-cross-product":
        return CrossProductStructure()
    raise ValueError(f"unknown builtin structure {tag!r}")
