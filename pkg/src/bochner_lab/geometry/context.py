"""Per-chart geometric fields on one evaluation backend."""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ..connection import christoffel, christoffel_conformal, riemann
from ..tensor import Jet, Sym, SymbolicInverseUnavailable, ein
from .charts import Chart, ManifoldSpec


EMBEDDING_ORDER = 3


class ChartGeometry:
    """Metric, connection and curvature of one chart.

    With ``points`` given, everything is a ``Jet`` evaluated there (the
    embedding is seeded to third order, enough for second derivatives of
    the metric and of fields built from first derivatives of the
    embedding).  Without points, everything is a ``Sym``.
    """

    EMBEDDING_ORDER = EMBEDDING_ORDER
    FIELD_ORDER = EMBEDDING_ORDER - 1

    def __init__(
        self,
        spec: ManifoldSpec,
        chart: Chart,
        points=None,
        use_conformal_shortcut: bool = True,
        embedding_order: int = EMBEDDING_ORDER,
    ):
        """``embedding_order`` below 3 gives cheaper geometry for value-only
        work (order 1 suffices for J and the metric at the points)."""
        self.EMBEDDING_ORDER = embedding_order
        self.FIELD_ORDER = embedding_order - 1
        self.spec = spec
        self.chart = chart
        self.n = chart.dim
        self.points = None if points is None else np.atleast_2d(np.asarray(points, dtype=float))
        self.use_conformal_shortcut = use_conformal_shortcut

    @property
    def symbolic(self) -> bool:
        return self.points is None

    @property
    def npoints(self) -> int:
        return 0 if self.points is None else self.points.shape[0]

    def field(self, exprs, order: int | None = None):
        """Field from chart-coordinate expression components."""
        if self.symbolic:
            return Sym(np.asarray(exprs, dtype=object), self.chart.coords)
        return Jet.from_exprs(exprs, self.chart.coords, self.points, self.FIELD_ORDER if order is None else order)

    def ambient_field(self, exprs, order: int | None = None):
        """Field from expressions in ambient coordinates X1..XN."""
        arr = np.asarray(exprs, dtype=object)
        local = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(*arr.shape):
            local[idx] = self.chart.localize(arr[idx])
        return self.field(local, order)

    def constant(self, values):
        values = np.asarray(values, dtype=float)
        if self.symbolic:
            return Sym(values.astype(object), self.chart.coords)
        return Jet.constant(values, self.npoints, self.n, self.EMBEDDING_ORDER)

    @cached_property
    def embedding(self):
        return self.field(np.array(self.chart.embedding, dtype=object), self.EMBEDDING_ORDER)

    @cached_property
    def jacobian(self):
        """dF[k, i] = d_i F^k."""
        return self.embedding.d()

    @cached_property
    def conformal(self):
        return self.field(self.spec.conformal_in(self.chart), self.EMBEDDING_ORDER - 1)

    @cached_property
    def gram(self):
        if self.chart.conformal_scale is not None and self.use_conformal_shortcut:
            return ein(",ij->ij", self.gram_scale, np.eye(self.n))
        return ein("ki,kj->ij", self.jacobian, self.jacobian)

    @cached_property
    def gram_scale(self):
        return self.field(self.chart.conformal_scale, self.EMBEDDING_ORDER - 1)

    @cached_property
    def gram_inverse(self):
        if self.chart.conformal_scale is not None and self.use_conformal_shortcut:
            return ein(",ij->ij", self.gram_scale.inv(), np.eye(self.n))
        return self.gram.inv()

    @cached_property
    def metric(self):
        return ein(",ij->ij", self.conformal, self.gram)

    @cached_property
    def metric_scale(self):
        """Scalar s with g = s * identity, when the chart is conformally flat."""
        if self.chart.conformal_scale is None:
            return None
        return ein(",->", self.conformal, self.gram_scale)

    @cached_property
    def metric_inverse(self):
        if self.metric_scale is not None and self.use_conformal_shortcut:
            return ein(",ij->ij", self.metric_scale.inv(), np.eye(self.n))
        try:
            return self.metric.inv()
        except SymbolicInverseUnavailable:
            raise

    @cached_property
    def christoffel(self):
        if self.metric_scale is not None and self.use_conformal_shortcut:
            return christoffel_conformal(self.metric_scale, self.n)
        return christoffel(self.metric, self.metric_inverse)

    @cached_property
    def riemann(self):
        return riemann(self.christoffel)

    def pullback_endomorphism(self, A):
        """Chart matrix of P A P for an ambient matrix field A (tangent projection P).

        Uses (dF^T dF)^{-1} dF^T A dF, which is the tangential part of A
        expressed in the coordinate basis.
        """
        return ein("ij,kj,kl,lm->im", self.gram_inverse, self.jacobian, A, self.jacobian)

    # numeric helpers ---------------------------------------------------
    def values(self, field) -> np.ndarray:
        if isinstance(field, Jet):
            return field.value
        return field.evaluate(self.points)
