"""Operators on tangent-bundle-valued forms.

A degree-p form is stored as a full component array ``w[k, i1, ..., ip]``
(value index first), antisymmetric in the p form slots.  Operators act on
``TBForm`` objects over a :class:`ChartGeometry` and work unchanged on the
numeric (``Jet``) and symbolic (``Sym``) routes.

Conventions, all with the connection's curvature sign:

* d w(X0..Xp)       = sum_k (-1)^k (nabla_{Xk} w)(X0..^Xk..Xp)
* delta w(X1..Xp-1) = -sum_i (nabla_{e_i} w)(e_i, X1..Xp-1)
* Laplacian         = d delta + delta d
* rough Laplacian   = trace of the second covariant derivative
* curvature term    S(X1..Xp) = sum_k (-1)^k (R(e_i, Xk) w)(e_i, X1..^Xk..Xp)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .connection import covariant_derivative
from .geometry.frames import orthonormal_frame
from .tensor import Jet, Sym, ein

MAX_DEGREE = 3
_L = "pqrstuvwxy"


class DegreeError(ValueError):
    pass


class CompatibilityError(ValueError):
    """An operation meaningful only for metric-compatible J was asked of another J."""


@dataclass(frozen=True)
class TBForm:
    """Tangent-bundle valued p-form; ``field`` has tshape (n,) * (p + 1).

    ``scalar`` forms (ordinary differential forms) have tshape (n,) * p.
    """

    field: object
    degree: int
    scalar: bool = False
    is_acs: bool = False

    def __post_init__(self):
        if not 0 <= self.degree <= MAX_DEGREE:
            raise DegreeError(f"degree {self.degree} outside 0..{MAX_DEGREE}")
        rank = self.degree + (0 if self.scalar else 1)
        if len(self.field.tshape) != rank:
            raise DegreeError(f"component array of rank {len(self.field.tshape)} for a degree-{self.degree} form")

    @property
    def upper(self) -> int:
        return 0 if self.scalar else 1

    def with_field(self, field, degree=None) -> "TBForm":
        return TBForm(field, self.degree if degree is None else degree, self.scalar)

    @classmethod
    def from_increasing(cls, geom, degree: int, components: dict, scalar: bool = False):
        """Build from components on strictly increasing multi-indices.

        ``components`` maps (k, i1 < ... < ip) (or (i1 < ... < ip) for
        scalar forms) to expressions; the rest follows by antisymmetry.
        """
        from .expr import Const

        n = geom.n
        shape = (n,) * (degree + (0 if scalar else 1))
        arr = np.empty(shape, dtype=object)
        arr.fill(Const(0.0))
        for key, e in components.items():
            key = tuple(key)
            head, slots = (key[:0], key) if scalar else (key[:1], key[1:])
            if list(slots) != sorted(set(slots)):
                raise ValueError(f"form slots {slots} are not strictly increasing")
            for perm in itertools.permutations(range(degree)):
                sign = _perm_sign(perm)
                idx = head + tuple(slots[j] for j in perm)
                arr[idx] = e if sign > 0 else -e
        return cls(geom.field(arr), degree, scalar)


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def nabla(geom, w: TBForm):
    """Components of nabla w, direction index last: D[k, I, a] = (nabla_a w)^k_I."""
    return covariant_derivative(w.field, geom.christoffel, upper=w.upper)


def covariant_derivative_form(geom, w: TBForm, direction: int):
    """Components of nabla_{d_a} w for a single coordinate direction a."""
    D = nabla(geom, w)
    idx = (slice(None),) * len(w.field.tshape) + (direction,)
    return D.take(idx)


def _alternate_derivative(D, rank: int, first_slot: int):
    """sum_s (-1)^s D with the trailing direction moved into form slot s."""
    p = rank - first_slot  # number of form slots of the input
    out = None
    for s in range(p + 1):
        term = D.moveaxis(-1, first_slot + s)
        if s % 2:
            term = -term
        out = term if out is None else out + term
    return out


def exterior_d(geom, w: TBForm) -> TBForm:
    if w.degree + 1 > MAX_DEGREE:
        raise DegreeError(f"d of a degree-{w.degree} form exceeds the degree cap {MAX_DEGREE}")
    D = nabla(geom, w)
    rank = len(w.field.tshape)
    return TBForm(_alternate_derivative(D, rank, w.upper), w.degree + 1, w.scalar)


def codifferential(geom, w: TBForm) -> TBForm:
    if w.degree < 1:
        raise DegreeError("codifferential of a degree-0 form")
    D = nabla(geom, w)
    rank = len(w.field.tshape)
    idx = _L[:rank]
    first = idx[w.upper]
    out = idx[: w.upper] + idx[w.upper + 1 :]
    field = ein(f"a{first},{idx}a->{out}", geom.metric_inverse, D)
    return TBForm(-field, w.degree - 1, w.scalar)


def hodge_laplace(geom, w: TBForm) -> TBForm:
    """d delta w + delta d w (only delta d for degree 0)."""
    total = codifferential(geom, exterior_d(geom, w)).field
    if w.degree >= 1:
        total = total + exterior_d(geom, codifferential(geom, w)).field
    return w.with_field(total)


def rough_laplacian(geom, w: TBForm) -> TBForm:
    """g^{ab} (nabla^2 w)(d_a, d_b) = nabla_{e_i} nabla_{e_i} w - nabla_{nabla_{e_i} e_i} w."""
    D = nabla(geom, w)
    DD = covariant_derivative(D, geom.christoffel, upper=w.upper)
    rank = len(w.field.tshape)
    idx = _L[:rank]
    return w.with_field(ein(f"ab,{idx}ab->{idx}", geom.metric_inverse, DD))


def curvature_action(Rm, w_field, upper: int):
    """(R(d_a, d_b) w) as components with trailing (a, b): derivation on every slot."""
    rank = len(w_field.tshape)
    idx = _L[:rank]
    out = None
    if upper:
        out = ein(f"{idx[0]}mab,m{idx[1:]}->{idx}ab", Rm, w_field)
    for s in range(upper, rank):
        replaced = idx[:s] + "m" + idx[s + 1 :]
        term = -ein(f"m{idx[s]}ab,{replaced}->{idx}ab", Rm, w_field)
        out = term if out is None else out + term
    return out


def weitzenbock_term(geom, w: TBForm) -> TBForm:
    """Curvature term S with Laplacian = -rough Laplacian + S."""
    rank = len(w.field.tshape)
    p = w.degree
    if p == 0:
        return w.with_field(w.field * 0.0)
    Rw = curvature_action(geom.riemann, w.field, w.upper)  # [..I.., a, b]
    head = _L[: w.upper]
    slots = _L[w.upper : rank]
    out = None
    for k in range(p):
        # (R(e_i, X_k) w)(e_i, X_1..^X_k..X_p), summed over i through g^{ci}
        rest = slots[:k] + slots[k + 1 :]
        term = ein(f"ci,{head}c{rest}i{slots[k]}->{head}{slots}", geom.metric_inverse, Rw)
        if (k + 1) % 2:
            term = -term
        out = term if out is None else out + term
    return w.with_field(out)


# ---------------------------------------------------------------- pointwise


def frame_components(values: np.ndarray, E: np.ndarray, upper: int) -> np.ndarray:
    """Numeric form components in an orthonormal frame E (batched (P, n, n))."""
    rank = values.ndim - 1
    out = values
    if upper:
        Einv = np.linalg.inv(E)
        out = np.einsum("pkm,pm...->pk...", Einv, out)
    for s in range(upper, rank):
        out = np.moveaxis(np.einsum("pa...,pai->pi...", np.moveaxis(out, 1 + s, 1), E), 1, 1 + s)
    return out


def pointwise_inner(geom, w: TBForm, t: TBForm, E: np.ndarray | None = None) -> np.ndarray:
    """sum over i1 < ... < ip of <w(e_I), t(e_I)> at each point."""
    if w.degree != t.degree or w.scalar != t.scalar:
        raise DegreeError("inner product of forms of different type")
    a = w.field.value if isinstance(w.field, Jet) else geom.values(w.field)
    b = t.field.value if isinstance(t.field, Jet) else geom.values(t.field)
    if E is None:
        E = orthonormal_frame(geom.values(geom.metric))
    return inner_values(a, b, E, w.degree, w.upper)


def inner_values(a: np.ndarray, b: np.ndarray, E: np.ndarray, degree: int, upper: int) -> np.ndarray:
    af = frame_components(a, E, upper)
    bf = frame_components(b, E, upper)
    prod = af * bf
    if upper:
        prod = prod.sum(axis=1)
    # full sum over all slot tuples counts each increasing tuple p! times
    return prod.reshape(prod.shape[0], -1).sum(axis=1) / math.factorial(degree)


def nabla_norm2(DJ: np.ndarray, E: np.ndarray) -> np.ndarray:
    """|nabla J|^2 = sum_ij |(nabla_{e_i} J)(e_j)|^2 from D[k, j, a] values."""
    Df = frame_components(DJ, E, upper=1)  # all lower slots to the frame, incl. direction
    return np.sum(Df**2, axis=(1, 2, 3))


# ------------------------------------------------------------- structures


def vector_covariant(geom, V, W):
    """nabla_V W for vector fields with label axes: V (n, *lv), W (n, *lw) -> (n, *lv, *lw)."""
    DW = covariant_derivative(W, geom.christoffel, upper=1)  # (n, *lw, a)
    lv = "fgh"[: len(V.tshape) - 1]
    lw = "wxyz"[: len(W.tshape) - 1]
    return ein(f"a{lv},k{lw}a->k{lv}{lw}", V, DW)


def bracket(geom, V, W):
    """[V, W] = nabla_V W - nabla_W V (torsion-free)."""
    a = vector_covariant(geom, V, W)
    b = vector_covariant(geom, W, V)
    # b has the label axes in the order (W labels, V labels)
    nv = len(V.tshape) - 1
    nw = len(W.tshape) - 1
    perm = [0] + list(range(1 + nw, 1 + nw + nv)) + list(range(1, 1 + nw))
    return a - b.transpose(perm)


def apply_endomorphism(J, V):
    """J V for a vector field V with label axes."""
    lv = "wxyz"[: len(V.tshape) - 1]
    return ein(f"km,m{lv}->k{lv}", J, V)


def nijenhuis(geom, J, X, Y):
    """N(X, Y) = J[JX, Y] + J[X, JY] + [X, Y] - [JX, JY].

    X and Y are vector fields of tshape (n, labels...), differentiable to
    first order; the result has tshape (n, X labels..., Y labels...).
    """
    JX = apply_endomorphism(J, X)
    JY = apply_endomorphism(J, Y)
    t1 = bracket(geom, JX, Y)
    t2 = bracket(geom, X, JY)
    t3 = bracket(geom, X, Y)
    t4 = bracket(geom, JX, JY)
    Jv = J.truncate(t1.order) if isinstance(J, Jet) else J
    lab = "wxyz"[: len(t1.tshape) - 1]
    return ein(f"km,m{lab}->k{lab}", Jv, t1 + t2) + t3 - t4


def nijenhuis_tensor(geom, J):
    """All components N(d_i, d_j)^k from coordinate-constant fields."""
    n = geom.n
    basis = geom.constant(np.eye(n))  # (n, labels n)
    return nijenhuis(geom, J, basis, basis)


def energy_density(geom, J):
    """e(J) = 1/2 sum_i |J e_i|^2 = 1/2 g_ab g^{ij} J^a_i J^b_j, as a field."""
    gJ = ein("ab,ai->bi", geom.metric, J)
    return ein("bi,bj,ij->", gJ, J, geom.metric_inverse) * 0.5


def trace_hessian(geom, f):
    """g^{ab} (nabla^2 f)_{ab} for a scalar field f (needs f to second order)."""
    Df = f.d()
    DDf = covariant_derivative(Df, geom.christoffel, upper=0)
    return ein("ab,ab->", geom.metric_inverse, DDf)


def frame_riemann(Rm: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Rf[l, k, i, j] = e^l(R(e_i, e_j) e_k) in an orthonormal frame E."""
    Einv = np.linalg.inv(E)
    return np.einsum("pLl,pLKIJ,pKk,pIi,pJj->plkij", np.swapaxes(Einv, 1, 2), Rm, E, E, E, optimize=True)


def frame_endomorphism(J: np.ndarray, E: np.ndarray) -> np.ndarray:
    return np.linalg.solve(E, J @ E)


def curvature_traces(Rf: np.ndarray, Jf: np.ndarray):
    """T1 = <J R(e_i,e_j) e_i, J e_j>, T2 = <R(e_i,e_j) J e_i, J e_j> and the
    scalar curvature S = <R(e_i,e_j) e_i, e_j>, from frame components."""
    Rii = np.einsum("plkkj->plj", Rf)  # R(e_i, e_j) e_i summed over i
    T1 = np.einsum("pql,plj,pqj->p", Jf, Rii, Jf)
    RJ = np.einsum("plmij,pmi->plj", Rf, Jf)  # R(e_i, e_j) J e_i summed over i
    T2 = np.einsum("plj,plj->p", RJ, Jf)
    S = np.einsum("pjj->p", Rii)
    return T1, T2, S


def hermitian_form(geom, J, check_compatible: bool = True, tol: float = 1e-8):
    """omega(X, Y) = <X, J Y> as a scalar 2-form, and its codifferential (a 1-form)."""
    omega_field = ein("ac,cb->ab", geom.metric, J)
    if check_compatible and isinstance(J, Jet):
        g = geom.metric.value
        Jv = J.value
        gram = np.einsum("pab,pai,pbj->pij", g, Jv, Jv)
        if np.max(np.abs(gram - g)) > tol * max(1.0, np.max(np.abs(g))):
            raise CompatibilityError("J is not compatible with the metric")
    omega = TBForm(omega_field, 2, scalar=True)
    return omega, codifferential(geom, omega)


def conjugate_acs(geom, J0, A, min_det: float = 1e-6):
    """J = A J0 A^{-1}; refuses when A is numerically singular at some point."""
    if isinstance(A, Jet):
        det = np.linalg.det(A.value)
        if np.any(np.abs(det) < min_det):
            raise np.linalg.LinAlgError("conjugating matrix field is singular at some point")
    return ein("ij,jk,kl->il", A, J0, A.inv())
