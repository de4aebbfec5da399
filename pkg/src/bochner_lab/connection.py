"""Levi-Civita connection and curvature.

Curvature sign: R(X, Y) = -nabla_X nabla_Y + nabla_Y nabla_X + nabla_[X,Y],
the negative of the more common convention.  Components are stored as
``Rm[l, k, i, j]`` with R(d_i, d_j) d_k = Rm[l, k, i, j] d_l.  With this sign a
unit round sphere has <R(e1, e2) e1, e2> = +1 and scalar curvature n(n-1).

Every function here takes fields (``Jet`` or ``Sym``) and returns fields;
the same formula serves numeric and symbolic evaluation.
"""
from __future__ import annotations


import numpy as np

from .tensor import Sym, ein


def christoffel(g, ginv):
    """Gamma[k, i, j] = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)."""
    dg = g.d()  # dg[i, j, a] = d_a g_ij
    t1 = ein("kl,jli->kij", ginv, dg)
    t2 = ein("kl,ilj->kij", ginv, dg)
    t3 = ein("kl,ijl->kij", ginv, dg)
    return (t1 + t2 - t3) * 0.5


def christoffel_conformal(scale, n: int):
    """Closed form for g = scale * identity, using d log(scale) = d scale / scale."""
    eye = np.eye(n)
    dlam = scale.d()
    inv = scale.inv()
    t1 = ein(",i,jk->kij", inv, dlam, eye)
    t2 = ein(",j,ik->kij", inv, dlam, eye)
    t3 = ein(",k,ij->kij", inv, dlam, eye)
    return (t1 + t2 - t3) * 0.5


def riemann(gamma):
    """Rm[l, k, i, j] in the sign convention documented at module level."""
    dG = gamma.d()  # dG[l, a, b, c] = d_c Gamma^l_ab
    t1 = ein("ljki->lkij", dG)
    t2 = ein("likj->lkij", dG)
    G = gamma if not hasattr(gamma, "truncate") else gamma.truncate(dG.order)
    t3 = ein("lim,mjk->lkij", G, G)
    t4 = ein("ljm,mik->lkij", G, G)
    return -(t1 - t2 + t3 - t4)


_LETTERS = "pqrstuvwxyz"


def covariant_derivative(T, gamma, upper: int = 1):
    """Components of nabla T with the direction index appended last.

    T carries ``upper`` (0 or 1) contravariant index in axis 0 and covariant
    indices in the remaining axes.  Each covariant slot picks up a
    -Gamma term and the contravariant one a +Gamma term.
    """
    rank = len(T.tshape)
    out = T.d()
    if rank == 0:
        return out
    idx = _LETTERS[:rank]
    if upper:
        out = out + ein(f"{idx[0]}am,m{idx[1:]}->{idx}a", gamma, T)
    for s in range(1 if upper else 0, rank):
        replaced = idx[:s] + "m" + idx[s + 1 :]
        out = out - ein(f"ma{idx[s]},{replaced}->{idx}a", gamma, T)
    return out


def riemann_apply(Rm: np.ndarray, X, Y, Z) -> np.ndarray:
    """R(X, Y) Z from numeric component values (batched over a leading axis)."""
    return np.einsum("...lkij,...k,...i,...j->...l", Rm, Z, X, Y)


def scalar_curvature(Rm, ginv):
    """S = sum_ij <R(e_i, e_j) e_i, e_j> = g^{ac} Rm[b, c, a, b]."""
    return ein("ac,bcab->", ginv, Rm)


def metric_compatibility_residual(g, gamma):
    """nabla g as a (0, 2) tensor; identically zero for the Levi-Civita connection."""
    return covariant_derivative(g, gamma, upper=0)


def is_symbolic(field) -> bool:
    return isinstance(field, Sym)
