"""Two interchangeable carriers for tensor fields on a chart.

``Jet`` holds numeric values of a field and its partial derivatives up to a
fixed order at a batch of points; products follow the Leibniz rule and
differentiation lowers the order by one.  ``Sym`` holds an object array of
expressions and differentiates them exactly.  All geometric operators are
written against the small common surface (``ein``, ``+``, ``-``, scalar
``*``, ``d``, ``moveaxis``, ``inv``), so the same formula runs on both.

Tensor axes come first, derivative axes last; a ``Jet`` part of order r has
shape ``(points, *tshape, n, ..., n)`` with r trailing derivative axes.
"""
from __future__ import annotations

import itertools
import math
import string
from functools import lru_cache

import numpy as np

from .expr import Const, Expr, compile_exprs, diff, simplify
from .expr.calculus import _postorder

DEFAULT_NODE_BUDGET = 200_000


class ExpressionBudgetExceeded(RuntimeError):
    """A symbolic result grew past the node budget; use the jet route instead."""


class SymbolicInverseUnavailable(RuntimeError):
    pass


# ---------------------------------------------------------------------- Jet


class Jet:
    __slots__ = ("parts", "tshape", "n")

    def __init__(self, parts, tshape, n):
        self.parts = list(parts)
        self.tshape = tuple(tshape)
        self.n = n

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def npoints(self) -> int:
        return self.parts[0].shape[0]

    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    @classmethod
    def constant(cls, values, npoints: int, n: int, order: int = 3):
        """A field whose components do not vary over the chart."""
        values = np.asarray(values, dtype=float)
        parts = [np.broadcast_to(values, (npoints,) + values.shape).copy()]
        for r in range(1, order + 1):
            parts.append(np.zeros((npoints,) + values.shape + (n,) * r))
        return cls(parts, values.shape, n)

    @classmethod
    def from_exprs(cls, exprs, variables, points, order: int = 2):
        """Evaluate expression components and their derivatives at ``points``.

        ``points`` has shape (P, n), columns ordered like ``variables``.
        """
        arr = np.asarray(exprs, dtype=object)
        tshape = arr.shape
        n = len(variables)
        points = np.asarray(points, dtype=float).reshape(-1, n)
        fn, index = _derivative_program(tuple(e.uid for e in arr.ravel()), tuple(arr.ravel()), tuple(variables), order)
        vals = fn(*[points[:, i] for i in range(n)])
        P = points.shape[0]
        m = arr.size
        parts = []
        for r in range(order + 1):
            part = np.empty((P, m) + (n,) * r)
            for combo, slot in index[r].items():
                block = np.stack(vals[slot : slot + m], axis=1)
                for perm in set(itertools.permutations(combo)):
                    part[(slice(None), slice(None)) + perm] = block
            parts.append(part.reshape((P,) + tshape + (n,) * r))
        return cls(parts, tshape, n)

    # arithmetic ---------------------------------------------------------
    def _combine(self, other, sign):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return Jet([a + sign * b for a, b in zip(self.parts[: k + 1], other.parts[: k + 1])], self.tshape, self.n)
        other = np.asarray(other, dtype=float)
        parts = [p.copy() for p in self.parts]
        parts[0] = parts[0] + sign * other
        return Jet(parts, self.tshape, self.n)

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return (-self)._combine(other, 1.0)

    def __neg__(self):
        return Jet([-p for p in self.parts], self.tshape, self.n)

    def __mul__(self, c):
        if isinstance(c, (Jet, Sym)):
            raise TypeError("use ein() for field products")
        return Jet([p * float(c) for p in self.parts], self.tshape, self.n)

    __rmul__ = __mul__

    def d(self) -> "Jet":
        """Partial derivatives as a new trailing tensor axis."""
        if self.order < 1:
            raise ValueError("jet has no derivative information left")
        return Jet(self.parts[1:], self.tshape + (self.n,), self.n)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.parts[: order + 1], self.tshape, self.n)

    def moveaxis(self, src, dst) -> "Jet":
        k = len(self.tshape)
        perm = list(range(k))
        src = src % k
        dst = dst % k
        perm.insert(dst, perm.pop(src))
        return self.transpose(perm)

    def transpose(self, perm) -> "Jet":
        perm = list(perm)
        out = []
        for r, p in enumerate(self.parts):
            axes = [0] + [a + 1 for a in perm] + list(range(1 + len(perm), 1 + len(perm) + r))
            out.append(p.transpose(axes))
        return Jet(out, tuple(self.tshape[a] for a in perm), self.n)

    def take(self, index) -> "Jet":
        """Index tensor axes with a tuple of ints/slices."""
        if not isinstance(index, tuple):
            index = (index,)
        sl = (slice(None),) + index
        parts = [p[sl] for p in self.parts]
        return Jet(parts, parts[0].shape[1:], self.n)

    def inv(self) -> "Jet":
        """Matrix inverse (tshape (m, m)) or reciprocal (tshape ())."""
        scalar = self.tshape == ()
        if scalar:
            h0 = 1.0 / self.parts[0]
        else:
            h0 = np.linalg.inv(self.parts[0])
        H = [h0]
        G = self.parts
        for r in range(1, self.order + 1):
            acc = None
            for k in range(1, r + 1):
                # G with k derivative axes times H with r-k derivative axes
                term = _leibniz_term(G[k], H[r - k], k, r - k, scalar, self.n)
                term = _symmetrize_split(term, k, r)
                acc = term if acc is None else acc + term
            if scalar:
                H.append(-_bcast_scalar(h0, r) * acc)
            else:
                H.append(-np.einsum("pij,pjk...->pik...", h0, acc))
        return Jet(H, self.tshape, self.n)

    def __repr__(self):
        return f"Jet(tshape={self.tshape}, order={self.order}, points={self.npoints})"


def _bcast_scalar(a, r):
    return a.reshape(a.shape + (1,) * r)


def _leibniz_term(g, h, k, rk, scalar, n):
    # g: (P, [m, m], k derivs), h: (P, [m, m], rk derivs) -> (P, [m, m], k derivs, rk derivs)
    if scalar:
        return g.reshape(g.shape + (1,) * rk) * h.reshape(h.shape[:1] + (1,) * k + h.shape[1:])
    L = string.ascii_uppercase
    dg = L[:k]
    dh = L[k : k + rk]
    return np.einsum(f"pij{dg},pjk{dh}->pik{dg}{dh}", g, h, optimize=True)


@lru_cache(maxsize=None)
def _split_perms(k, r):
    perms = []
    for S in itertools.combinations(range(r), k):
        Sc = [j for j in range(r) if j not in S]
        perms.append([S.index(j) if j in S else k + Sc.index(j) for j in range(r)])
    return perms


def _symmetrize_split(term, k, r):
    """Sum over the ways of splitting r derivative slots into k and r-k."""
    if k == 0 or k == r:
        return term
    lead = term.ndim - r
    out = None
    for perm in _split_perms(k, r):
        t = term.transpose(list(range(lead)) + [lead + j for j in perm])
        out = t if out is None else out + t
    return out


_derivative_cache: dict = {}


def _derivative_program(uids, exprs, variables, order):
    key = (uids, variables, order)
    hit = _derivative_cache.get(key)
    if hit is not None:
        return hit
    flat = []
    index = []
    current = {(): list(exprs)}
    for r in range(order + 1):
        if r > 0:
            nxt = {}
            for combo in itertools.combinations_with_replacement(range(len(variables)), r):
                parent = current[combo[:-1]]
                nxt[combo] = [diff(e, variables[combo[-1]]) for e in parent]
            current = nxt
        slots = {}
        for combo, es in current.items():
            slots[combo] = len(flat)
            flat.extend(es)
        index.append(slots)
    fn = compile_exprs(flat, variables)
    _derivative_cache[key] = (fn, index)
    return fn, index


# ---------------------------------------------------------------------- Sym


class Sym:
    """Object array of expressions in the chart variables."""

    __slots__ = ("arr", "variables", "budget")

    def __init__(self, arr, variables, budget: int = DEFAULT_NODE_BUDGET):
        arr = np.asarray(arr, dtype=object)
        if arr.ndim:
            flat = arr.ravel()
            for i, e in enumerate(flat):
                if not isinstance(e, Expr):
                    flat[i] = Const(e)
        elif not isinstance(arr.item(), Expr):
            arr = np.asarray(Const(arr.item()), dtype=object)
        self.arr = arr
        self.variables = tuple(variables)
        self.budget = budget

    @property
    def tshape(self):
        return self.arr.shape

    @property
    def n(self):
        return len(self.variables)

    def _new(self, arr):
        out = Sym(arr, self.variables, self.budget)
        out.check_budget()
        return out

    def check_budget(self):
        if self.arr.size == 0:
            return
        total = len(_postorder(list(self.arr.ravel())))
        if total > self.budget:
            raise ExpressionBudgetExceeded(f"{total} expression nodes exceeds budget {self.budget}")

    def __add__(self, other):
        o = other.arr if isinstance(other, Sym) else np.asarray(other, dtype=float)
        return self._new(self.arr + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = other.arr if isinstance(other, Sym) else np.asarray(other, dtype=float)
        return self._new(self.arr - o)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self._new(-self.arr)

    def __mul__(self, c):
        if isinstance(c, (Jet, Sym)):
            raise TypeError("use ein() for field products")
        return self._new(self.arr * float(c))

    __rmul__ = __mul__

    def d(self) -> "Sym":
        n = self.n
        out = np.empty(self.arr.shape + (n,), dtype=object)
        for idx in np.ndindex(*self.arr.shape):
            e = self.arr[idx]
            for a, v in enumerate(self.variables):
                out[idx + (a,)] = diff(e, v)
        return self._new(out)

    def moveaxis(self, src, dst) -> "Sym":
        return Sym(np.moveaxis(self.arr, src, dst), self.variables, self.budget)

    def transpose(self, perm) -> "Sym":
        return Sym(self.arr.transpose(perm), self.variables, self.budget)

    def take(self, index) -> "Sym":
        return Sym(self.arr[index], self.variables, self.budget)

    def simplify(self) -> "Sym":
        return Sym(np.vectorize(simplify, otypes=[object])(self.arr), self.variables, self.budget)

    def inv(self) -> "Sym":
        if self.arr.ndim == 0:
            return self._new(np.asarray(1 / self.arr.item(), dtype=object))
        m = self.arr.shape[0]
        if m > 4:
            raise SymbolicInverseUnavailable(f"symbolic inverse of a {m}x{m} matrix")
        det = _det(self.arr)
        adj = np.empty((m, m), dtype=object)
        for i in range(m):
            for j in range(m):
                minor = np.delete(np.delete(self.arr, j, axis=0), i, axis=1)
                sign = -1.0 if (i + j) % 2 else 1.0
                adj[i, j] = sign * _det(minor) if minor.size else Const(1.0)
        return self._new(adj / det)

    def evaluate(self, points) -> np.ndarray:
        """Numeric values at ``points`` (shape (P, n)) as shape (P, *tshape)."""
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        flat = list(self.arr.ravel())
        fn = compile_exprs(flat, self.variables)
        vals = fn(*[points[:, i] for i in range(self.n)])
        return np.stack(vals, axis=-1).reshape((points.shape[0],) + self.arr.shape)

    def __repr__(self):
        return f"Sym(tshape={self.tshape}, variables={self.variables})"


def _det(a):
    m = a.shape[0]
    if m == 0:
        return Const(1.0)
    if m == 1:
        return a[0, 0]
    if m == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    total = Const(0.0)
    for j in range(m):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        term = a[0, j] * _det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


# ------------------------------------------------------------------ einsum


def _parse_subscripts(subscripts, nops):
    if "->" in subscripts:
        ins, out = subscripts.split("->")
    else:
        raise ValueError("explicit output subscripts required")
    ins = ins.split(",")
    if len(ins) != nops:
        raise ValueError("operand count does not match subscripts")
    return [s.strip() for s in ins], out.strip()


def ein(subscripts: str, *ops):
    """Einstein summation over tensor axes of fields and constant arrays."""
    ins, out = _parse_subscripts(subscripts, len(ops))
    if any(isinstance(o, Sym) for o in ops):
        syms = [o for o in ops if isinstance(o, Sym)]
        arrs = [o.arr if isinstance(o, Sym) else np.asarray(o, dtype=float).astype(object) for o in ops]
        res = np.einsum(f"{','.join(ins)}->{out}", *arrs, optimize=False)
        return syms[0]._new(np.asarray(res, dtype=object))
    if not any(isinstance(o, Jet) for o in ops):
        return np.einsum(subscripts, *ops, optimize=True)
    # pairwise reduction keeping indices needed later
    ops = list(ops)
    subs = list(ins)
    while len(ops) > 1:
        a, b = ops[0], ops[1]
        later = "".join(subs[2:]) + out
        keep = "".join(dict.fromkeys(c for c in subs[0] + subs[1] if c in later))
        merged = _ein2(subs[0], subs[1], keep, a, b)
        ops = [merged] + ops[2:]
        subs = [keep] + subs[2:]
    return _ein1(subs[0], out, ops[0])


def _ein1(sub, out, a):
    if not isinstance(a, Jet):
        return np.einsum(f"{sub}->{out}", a)
    L = string.ascii_uppercase
    parts = []
    for r, p in enumerate(a.parts):
        D = L[:r]
        parts.append(np.einsum(f"...{sub}{D}->...{out}{D}", p))
    return Jet(parts, parts[0].shape[1:], a.n)


def _sum_private(s, X, keep):
    lone = tuple(i for i, c in enumerate(s) if c not in keep)
    if not lone:
        return s, X
    return "".join(c for c in s if c in keep), X.sum(axis=lone)


def _pair(sa, sb, out, A, B):
    """Two-operand einsum through one batched matmul (much faster than
    einsum's generic loop when a long point axis is shared)."""
    if len(set(sa)) < len(sa) or len(set(sb)) < len(sb):
        return np.einsum(f"{sa},{sb}->{out}", A, B)
    # indices private to one operand and absent from the output are summed first
    sa, A = _sum_private(sa, A, sb + out)
    sb, B = _sum_private(sb, B, sa + out)
    sizes = dict(zip(sa, A.shape))
    sizes.update(zip(sb, B.shape))
    batch = [c for c in out if c in sa and c in sb]
    contr = [c for c in sa if c in sb and c not in out]
    af = [c for c in out if c in sa and c not in sb]
    bf = [c for c in out if c in sb and c not in sa]

    def size(cs):
        return math.prod(sizes[c] for c in cs)

    At = np.transpose(A, [sa.index(c) for c in batch + af + contr]).reshape(size(batch), size(af), size(contr))
    Bt = np.transpose(B, [sb.index(c) for c in batch + contr + bf]).reshape(size(batch), size(contr), size(bf))
    C = np.matmul(At, Bt).reshape([sizes[c] for c in batch + af + bf])
    cur = batch + af + bf
    return np.transpose(C, [cur.index(c) for c in out])


def _ein2(sa, sb, out, a, b):
    L = string.ascii_uppercase
    if not isinstance(a, Jet):
        a, b, sa, sb, swapped = b, a, sb, sa, True
    else:
        swapped = False
    if not isinstance(b, Jet):
        const = np.asarray(b, dtype=float)
        parts = []
        for r, p in enumerate(a.parts):
            D = L[:r]
            parts.append(_pair(f"Z{sa}{D}", sb, f"Z{out}{D}", p, const))
        return Jet(parts, parts[0].shape[1:], a.n)
    if swapped:
        a, b, sa, sb = b, a, sb, sa
    order = min(a.order, b.order)
    parts = []
    for r in range(order + 1):
        acc = None
        for k in range(r + 1):
            Da = L[:k]
            Db = L[k:r]
            term = _pair(f"Z{sa}{Da}", f"Z{sb}{Db}", f"Z{out}{Da}{Db}", a.parts[k], b.parts[r - k])
            term = _symmetrize_split(term, k, r)
            acc = term if acc is None else acc + term
        parts.append(acc)
    return Jet(parts, parts[0].shape[1:], a.n)
