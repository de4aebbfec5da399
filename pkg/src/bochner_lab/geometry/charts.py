"""Charts, manifold descriptions and the metric they induce."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..expr import Const, Expr, Var, diff, parse, simplify, substitute


def ambient_name(k: int) -> str:
    """Name of the k-th (0-based) ambient coordinate inside expressions."""
    return f"X{k + 1}"


@dataclass(frozen=True)
class Chart:
    """A coordinate box with an embedding into R^N.

    ``margin`` shrinks the box to the usable region used when assigning
    quadrature nodes.  ``conformal_scale``, when given, is the known factor
    with dF^T dF = scale * identity; ``projection`` names the inverse map
    used to place sphere quadrature nodes in the chart.
    """

    name: str
    coords: tuple
    domain: tuple
    embedding: tuple
    margin: float = 0.0
    conformal_scale: Optional[Expr] = None
    projection: Optional[str] = None
    periodic: bool = False

    def __post_init__(self):
        if len(self.domain) != len(self.coords):
            raise ValueError(f"chart {self.name}: domain and coordinates differ in length")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def ambient_dim(self) -> int:
        return len(self.embedding)

    def usable(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        lo = np.array([a for a, _ in self.domain]) + self.margin
        hi = np.array([b for _, b in self.domain]) - self.margin
        return np.all((x >= lo - 1e-12) & (x <= hi + 1e-12), axis=1)

    def ambient_substitution(self) -> dict:
        return {ambient_name(k): e for k, e in enumerate(self.embedding)}

    def localize(self, e: Expr) -> Expr:
        """Rewrite an expression in ambient coordinates X1..XN into chart coordinates."""
        return substitute(e, self.ambient_substitution())

    def embed(self, x: np.ndarray) -> np.ndarray:
        from ..expr import compile_exprs

        x = np.atleast_2d(x)
        fn = compile_exprs(self.embedding, self.coords)
        return np.stack(fn(*x.T), axis=1)

    def project(self, p: np.ndarray) -> np.ndarray:
        """Chart coordinates of embedded points (sphere projections only)."""
        p = np.atleast_2d(p)
        if self.projection == "stereographic-north":
            return p[:, :-1] / (1.0 - p[:, -1:])
        if self.projection == "stereographic-south":
            return p[:, :-1] / (1.0 + p[:, -1:])
        raise ValueError(f"chart {self.name} has no inverse projection")


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    dim: int
    charts: tuple
    structure: object
    conformal: Optional[Expr] = None
    quadrature: str = "torus"
    resolution: int = 16
    description: str = ""
    known: tuple = field(default_factory=tuple)
    # pointwise values every node must reproduce, e.g. {"S": 2.0}
    constants: dict = field(default_factory=dict)
    exact_volume: Optional[float] = None
    volume_resolution: Optional[int] = None

    def __post_init__(self):
        if self.dim % 2:
            raise ValueError(f"{self.name}: almost complex structures need even dimension")
        for c in self.charts:
            if c.dim != self.dim:
                raise ValueError(f"{self.name}: chart {c.name} has dimension {c.dim}, expected {self.dim}")

    def chart(self, name: str) -> Chart:
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def chart_index(self, name: str) -> int:
        return [c.name for c in self.charts].index(name)

    def conformal_in(self, chart: Chart) -> Expr:
        if self.conformal is None:
            return Const(1.0)
        return chart.localize(self.conformal)


def induced_metric(chart: Chart, conformal=None, simplified: bool = True) -> np.ndarray:
    """Matrix of expressions g_ij = c * sum_k dF^k/dx_i dF^k/dx_j."""
    if isinstance(conformal, str):
        conformal = parse(conformal)
    jac = [[diff(f, x) for x in chart.coords] for f in chart.embedding]
    d = chart.dim
    g = np.empty((d, d), dtype=object)
    factor = chart.localize(conformal) if conformal is not None else None
    for i in range(d):
        for j in range(d):
            s = Const(0.0)
            for row in jac:
                s = s + row[i] * row[j]
            if factor is not None:
                s = s * factor
            g[i, j] = simplify(s) if simplified else s
    return g


def coordinate_symbols(chart: Chart):
    return [Var(c) for c in chart.coords]
