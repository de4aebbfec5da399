"""Hash-consed expression nodes and their constructors.

Every node is interned: two structurally equal trees are the same Python
object, so ``a is b`` is structural equality and ``uid`` is a structural id.
Two families of constructors exist.  The capitalised ones (``Add``, ``Mul``,
...) build exactly the node asked for, only flattening nested sums and
products.  The lower-case ones (``add``, ``mul``, ...) apply local
simplification rules and are what the operator overloads use.
"""
from __future__ import annotations

import math
import struct
import threading
import zlib

FUNCTIONS = ("sin", "cos", "sqrt", "exp")

_OP_CODES = {"const": 1, "var": 2, "add": 3, "mul": 4, "div": 5, "pow": 6, "func": 7}
_MASK = (1 << 64) - 1


class Expr:
    """Immutable expression node.  Build through the constructors, never directly."""

    __slots__ = ("op", "value", "args", "uid", "skey", "size", "__weakref__")

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    # arithmetic goes through the simplifying constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        return power(self, n)

    def __hash__(self):
        return self.uid

    def __eq__(self, other):
        return self is other

    def __repr__(self):
        from .parser import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .parser import to_text

        return to_text(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def is_zero(self) -> bool:
        return self.op == "const" and self.value == 0.0


class _Interner:
    """Thread-safe insert-or-get table for nodes."""

    def __init__(self):
        self._table: dict = {}
        self._lock = threading.Lock()

    def get(self, op, value, args):
        key = (op, value, tuple(a.uid for a in args))
        node = self._table.get(key)
        if node is not None:
            return node
        with self._lock:
            node = self._table.get(key)
            if node is None:
                node = object.__new__(Expr)
                object.__setattr__(node, "op", op)
                object.__setattr__(node, "value", value)
                object.__setattr__(node, "args", tuple(args))
                object.__setattr__(node, "uid", len(self._table) + 1)
                object.__setattr__(node, "skey", _structural_key(op, value, args))
                object.__setattr__(node, "size", 1 + sum(a.size for a in args))
                self._table[key] = node
        return node

    def __len__(self):
        return len(self._table)

    def lookup(self, op, value, args):
        return self._table.get((op, value, tuple(a.uid for a in args)))


INTERNER = _Interner()


def _structural_key(op, value, args) -> int:
    # Deterministic across processes (unlike hash(str)); used for canonical ordering.
    if isinstance(value, float):
        vb = struct.pack("<d", value)
    elif value is None:
        vb = b""
    else:
        vb = str(value).encode()
    h = (_OP_CODES[op] * 0x9E3779B97F4A7C15 + zlib.crc32(vb)) & _MASK
    for a in args:
        h = ((h ^ a.skey) * 0x100000001B3 + 0x632BE59BD9B4E019) & _MASK
        h ^= h >> 29
    return h


# ---------------------------------------------------------------- raw nodes


def Const(v) -> Expr:
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite constant {v}")
    if v == 0.0:
        v = 0.0  # drop the sign of -0.0
    return INTERNER.get("const", v, ())


def Var(name: str) -> Expr:
    return INTERNER.get("var", str(name), ())


def Add(*args: Expr) -> Expr:
    flat = []
    for a in args:
        flat.extend(a.args if a.op == "add" else (a,))
    if len(flat) == 1:
        return flat[0]
    if not flat:
        return ZERO
    return INTERNER.get("add", None, flat)


def Mul(*args: Expr) -> Expr:
    flat = []
    for a in args:
        flat.extend(a.args if a.op == "mul" else (a,))
    if len(flat) == 1:
        return flat[0]
    if not flat:
        return ONE
    return INTERNER.get("mul", None, flat)


def Div(num: Expr, den: Expr) -> Expr:
    return INTERNER.get("div", None, (num, den))


def Pow(base: Expr, n: int) -> Expr:
    if int(n) != n:
        raise TypeError("only integer powers are supported")
    return INTERNER.get("pow", int(n), (base,))


def Func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return INTERNER.get("func", name, (arg,))


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return Const(x)
    try:  # numpy scalars
        return Const(float(x))
    except (TypeError, ValueError):
        raise TypeError(f"cannot convert {type(x).__name__} to Expr") from None


# ----------------------------------------------------- simplifying builders


def _split_coeff(term: Expr):
    if term.op == "const":
        return term.value, ONE
    if term.op == "mul" and term.args[0].op == "const":
        rest = term.args[1:]
        return term.args[0].value, rest[0] if len(rest) == 1 else INTERNER.get("mul", None, rest)
    return 1.0, term


def add(*terms: Expr) -> Expr:
    const = 0.0
    coeffs: dict = {}
    order = []
    stack = list(terms)
    stack.reverse()
    while stack:
        t = stack.pop()
        if t.op == "add":
            stack.extend(reversed(t.args))
            continue
        if t.op == "const":
            const += t.value
            continue
        c, rest = _split_coeff(t)
        if rest.uid in coeffs:
            coeffs[rest.uid][0] += c
        else:
            coeffs[rest.uid] = [c, rest]
            order.append(rest.uid)
    out = []
    for uid in order:
        c, rest = coeffs[uid]
        if c == 0.0:
            continue
        out.append(rest if c == 1.0 else _scaled(c, rest))
    out.sort(key=lambda e: e.skey)
    if const != 0.0:
        out.insert(0, Const(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return INTERNER.get("add", None, out)


def _scaled(c: float, e: Expr) -> Expr:
    if e.op == "mul":
        return INTERNER.get("mul", None, (Const(c),) + e.args)
    return INTERNER.get("mul", None, (Const(c), e))


def mul(*factors: Expr) -> Expr:
    const = 1.0
    powers: dict = {}
    order = []
    stack = list(factors)
    stack.reverse()
    while stack:
        f = stack.pop()
        if f.op == "mul":
            stack.extend(reversed(f.args))
            continue
        if f.op == "const":
            const *= f.value
            continue
        if f.op == "div":
            stack.append(power(f.args[1], -1))
            stack.append(f.args[0])
            continue
        if f.op == "pow":
            base, n = f.args[0], f.value
        else:
            base, n = f, 1
        if base.uid in powers:
            powers[base.uid][0] += n
        else:
            powers[base.uid] = [n, base]
            order.append(base.uid)
    if const == 0.0:
        return ZERO
    out = []
    for uid in order:
        n, base = powers[uid]
        if n == 0:
            continue
        p = base if n == 1 else power(base, n)
        if p.op == "const":
            const *= p.value
        elif p.op == "mul":  # power distributed over a product
            stack2 = list(p.args)
            for q in stack2:
                if q.op == "const":
                    const *= q.value
                else:
                    out.append(q)
        else:
            out.append(p)
    out.sort(key=lambda e: e.skey)
    if const != 1.0 or not out:
        out.insert(0, Const(const))
    if len(out) == 1:
        return out[0]
    return INTERNER.get("mul", None, out)


def neg(e: Expr) -> Expr:
    return mul(Const(-1.0), e)


def power(base: Expr, n: int) -> Expr:
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if base.op == "const":
        if base.value == 0.0 and n < 0:
            return Pow(base, n)
        return Const(base.value ** n)
    if base.op == "pow":
        return power(base.args[0], base.value * n)
    if base.op == "mul":
        return mul(*[power(f, n) for f in base.args])
    if base.op == "div":
        return mul(power(base.args[0], n), power(base.args[1], -n))
    if base.op == "func" and base.value == "sqrt" and n % 2 == 0:
        return power(base.args[0], n // 2)
    return Pow(base, n)


def div(num: Expr, den: Expr) -> Expr:
    if den.op == "const" and den.value == 0.0:
        return Div(num, den)
    return mul(num, power(den, -1))


_FOLD = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}


def func(name: str, arg: Expr) -> Expr:
    if arg.op == "const":
        if name == "sqrt" and arg.value < 0:
            return Func(name, arg)
        return Const(_FOLD[name](arg.value))
    return Func(name, arg)


def sin(e) -> Expr:
    return func("sin", as_expr(e))


def cos(e) -> Expr:
    return func("cos", as_expr(e))


def exp(e) -> Expr:
    return func("exp", as_expr(e))


def sqrt(e) -> Expr:
    return func("sqrt", as_expr(e))
