"""Differentiation, simplification, substitution and evaluation of expressions."""
from __future__ import annotations

import math
import threading

import numpy as np

from .core import (
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    ONE,
    Pow,
    Var,
    ZERO,
    add,
    as_expr,
    func,
    mul,
    power,
)


class UnboundVariableError(KeyError):
    pass


class DomainError(ArithmeticError):
    """Evaluation left the domain of an operation.  ``subtree`` is the culprit."""

    def __init__(self, message: str, subtree: Expr):
        super().__init__(f"{message} in {subtree}")
        self.subtree = subtree


def _postorder(roots):
    """Unique nodes of the DAG below ``roots``, children before parents."""
    seen = set()
    out = []
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for a in reversed(node.args):
            if a.uid not in seen:
                stack.append((a, False))
    return out


def node_count(e: Expr, shared: bool = True) -> int:
    """Unique DAG nodes (``shared``) or plain tree nodes."""
    return len(_postorder([e])) if shared else e.size


def free_symbols(e: Expr) -> set[str]:
    return {n.value for n in _postorder([e]) if n.op == "var"}


# --------------------------------------------------------------- rebuilding


class _Raw:
    add = staticmethod(Add)
    mul = staticmethod(Mul)
    power = staticmethod(Pow)
    func = staticmethod(Func)

    @staticmethod
    def div(a, b):
        return Div(a, b)


class _Smart:
    add = staticmethod(add)
    mul = staticmethod(mul)
    power = staticmethod(power)
    func = staticmethod(func)

    @staticmethod
    def div(a, b):
        return mul(a, power(b, -1))


def _rebuild(node: Expr, args, b) -> Expr:
    op = node.op
    if op == "add":
        return b.add(*args)
    if op == "mul":
        return b.mul(*args)
    if op == "div":
        return b.div(*args)
    if op == "pow":
        return b.power(args[0], node.value)
    if op == "func":
        return b.func(node.value, args[0])
    return node


_simplify_cache: dict[int, Expr] = {}
_diff_cache: dict[tuple, Expr] = {}
_cache_lock = threading.Lock()


def simplify(e: Expr) -> Expr:
    """Constant folding, 0/1 identities, like-term and like-factor collection.

    Each rule shrinks the tree or keeps its size while folding constants, so
    the rewrite terminates; there is no attempt at a canonical form.
    """
    hit = _simplify_cache.get(e.uid)
    if hit is not None:
        return hit
    memo: dict[int, Expr] = {}
    for node in _postorder([e]):
        cached = _simplify_cache.get(node.uid)
        if cached is not None:
            memo[node.uid] = cached
            continue
        if node.args:
            new = _rebuild(node, [memo[a.uid] for a in node.args], _Smart)
        else:
            new = node
        memo[node.uid] = new
    out = memo[e.uid]
    with _cache_lock:
        _simplify_cache.update((k, v) for k, v in memo.items())
    return out


def diff(e: Expr, var: str, simplify: bool = True) -> Expr:
    """Exact derivative of ``e`` with respect to the variable named ``var``.

    With ``simplify=False`` the result is built from raw nodes, which is only
    useful for measuring how much simplification saves.
    """
    if isinstance(var, Expr):
        var = var.value
    b = _Smart if simplify else _Raw
    key_tag = (var, simplify)
    memo: dict[int, Expr] = {}
    for node in _postorder([e]):
        cached = _diff_cache.get((node.uid, key_tag))
        if cached is not None:
            memo[node.uid] = cached
            continue
        memo[node.uid] = _diff_node(node, var, memo, b, simplify)
    with _cache_lock:
        _diff_cache.update(((k, key_tag), v) for k, v in memo.items())
    return memo[e.uid]


def _diff_node(node: Expr, var: str, memo, b, smart: bool) -> Expr:
    op = node.op
    if op == "const":
        return ZERO
    if op == "var":
        return ONE if node.value == var else ZERO
    d = [memo[a.uid] for a in node.args]
    if op == "add":
        terms = [t for t in d if not t.is_zero()] if smart else d
        return b.add(*terms) if terms else ZERO
    if op == "mul":
        terms = []
        for i, di in enumerate(d):
            if smart and di.is_zero():
                continue
            factors = list(node.args)
            factors[i] = di
            terms.append(b.mul(*factors))
        return b.add(*terms) if terms else ZERO
    if op == "div":
        num, den = node.args
        dn, dd = d
        top = b.add(b.mul(dn, den), b.mul(Const(-1.0), num, dd))
        return b.div(top, b.power(den, 2))
    if op == "pow":
        (base,) = node.args
        if smart and d[0].is_zero():
            return ZERO
        n = node.value
        return b.mul(Const(n), b.power(base, n - 1), d[0])
    if op == "func":
        (a,) = node.args
        if smart and d[0].is_zero():
            return ZERO
        name = node.value
        if name == "sin":
            return b.mul(b.func("cos", a), d[0])
        if name == "cos":
            return b.mul(Const(-1.0), b.func("sin", a), d[0])
        if name == "exp":
            return b.mul(node, d[0])
        if name == "sqrt":
            return b.mul(Const(0.5), b.power(node, -1), d[0])
    raise ValueError(f"cannot differentiate node {op}")


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables by expressions (keys are names), simplifying on the way up."""
    mapping = {k.value if isinstance(k, Expr) else k: as_expr(v) for k, v in mapping.items()}
    memo: dict[int, Expr] = {}
    for node in _postorder([e]):
        if node.op == "var":
            memo[node.uid] = mapping.get(node.value, node)
        elif node.args:
            memo[node.uid] = _rebuild(node, [memo[a.uid] for a in node.args], _Smart)
        else:
            memo[node.uid] = node
    return memo[e.uid]


# --------------------------------------------------------------- evaluation


def evaluate(e: Expr, env: dict) -> float:
    """IEEE double value of ``e``; unbound variables and domain errors raise."""
    vals: dict[int, float] = {}
    for node in _postorder([e]):
        op = node.op
        if op == "const":
            v = node.value
        elif op == "var":
            try:
                v = float(env[node.value])
            except KeyError:
                raise UnboundVariableError(node.value) from None
        else:
            a = [vals[x.uid] for x in node.args]
            if op == "add":
                v = math.fsum(a) if len(a) > 2 else a[0] + a[1]
            elif op == "mul":
                v = 1.0
                for x in a:
                    v *= x
            elif op == "div":
                if a[1] == 0.0:
                    raise DomainError("division by zero", node)
                v = a[0] / a[1]
            elif op == "pow":
                if a[0] == 0.0 and node.value < 0:
                    raise DomainError("division by zero", node)
                v = a[0] ** node.value
            else:
                name = node.value
                if name == "sqrt":
                    if a[0] < 0:
                        raise DomainError("square root of a negative number", node)
                    v = math.sqrt(a[0])
                elif name == "exp":
                    try:
                        v = math.exp(a[0])
                    except OverflowError:
                        raise DomainError("overflow", node) from None
                else:
                    v = math.sin(a[0]) if name == "sin" else math.cos(a[0])
        vals[node.uid] = v
    return vals[e.uid]


_NP_FUNCS = {"sin": "np.sin", "cos": "np.cos", "exp": "np.exp", "sqrt": "np.sqrt"}


def compile_exprs(exprs, variables):
    """Vectorised evaluator for many expressions sharing one DAG.

    Returns ``f(*arrays) -> list of arrays`` where the arrays are the
    variables in ``variables`` order.  Non-finite outputs raise ``DomainError``.
    """
    exprs = list(exprs)
    variables = list(variables)
    nodes = _postorder(exprs)
    names: dict[int, str] = {}
    lines = [f"def _f({', '.join('v%d' % i for i in range(len(variables)))}):"]
    index = {v: i for i, v in enumerate(variables)}
    for k, node in enumerate(nodes):
        op = node.op
        if op == "const":
            names[node.uid] = f"({node.value!r})"
            continue
        if op == "var":
            if node.value not in index:
                raise UnboundVariableError(node.value)
            names[node.uid] = "v%d" % index[node.value]
            continue
        a = [names[x.uid] for x in node.args]
        if op == "add":
            rhs = " + ".join(a)
        elif op == "mul":
            rhs = " * ".join(a)
        elif op == "div":
            rhs = f"{a[0]} / {a[1]}"
        elif op == "pow":
            n = node.value
            rhs = f"{a[0]} ** {n}" if n > 0 else f"1.0 / {a[0]} ** {-n}"
        else:
            rhs = f"{_NP_FUNCS[node.value]}({a[0]})"
        names[node.uid] = "t%d" % k
        lines.append(f"    t{k} = {rhs}")
    lines.append(f"    return [{', '.join(names[e.uid] for e in exprs)}]")
    scope = {"np": np}
    exec(compile("\n".join(lines), "<bochner_lab.expr>", "exec"), scope)
    raw = scope["_f"]

    def f(*arrays):
        arrays = [np.asarray(a, dtype=float) for a in arrays]
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        with np.errstate(all="ignore"):
            out = raw(*arrays)
        res = []
        for e, v in zip(exprs, out):
            v = np.broadcast_to(np.asarray(v, dtype=float), shape)
            if not np.all(np.isfinite(v)):
                raise DomainError("non-finite value", e)
            res.append(v)
        return res

    return f
