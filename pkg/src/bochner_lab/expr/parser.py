"""Recursive-descent parser and printer for the expression language.

Grammar (EBNF)::

    expr    = term , { ( "+" | "-" ) , term } ;
    term    = unary , { ( "*" | "/" ) , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , [ "-" ] , integer ] ;
    atom    = number | "pi" | name | name , "(" , expr , ")" | "(" , expr , ")" ;
    number  = digits , [ "." , digits ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digits ]
            | "." , digits , [ exponent ] ;
    name    = letter , { letter | digit | "_" } ;

Functions: ``sin cos sqrt exp``.  ``a - b`` is read as ``a + (-1)*b`` and a
leading minus on a number literal folds into the constant, so that
``parse(to_text(e)) is e`` holds for every tree built by the constructors.
"""
from __future__ import annotations

import math
import re

from .core import FUNCTIONS, Add, Const, Div, Expr, Func, Mul, Pow, Var

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, src: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.message = message
        self.offset = offset
        self.src = src


def _tokenize(src: str):
    pos = 0
    toks = []
    while True:
        m = _TOKEN.match(src, pos)
        if m is None:
            rest = src[pos:]
            if rest.strip() == "":
                break
            off = pos + (len(rest) - len(rest.lstrip()))
            raise ParseError(f"unexpected character {src[off]!r}", off, src)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(src)))
    return toks


def _negate(e: Expr) -> Expr:
    if e.op == "const":
        return Const(-e.value)
    if e.op == "mul" and e.args[0].op == "const":
        return Mul(Const(-e.args[0].value), *e.args[1:])
    return Mul(Const(-1.0), e)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op):
        t = self.peek()
        if t[0] == "op" and t[1] == op:
            return self.take()
        if op == ")":
            raise ParseError("unbalanced parenthesis", t[2], self.src)
        raise ParseError(f"expected {op!r}", t[2], self.src)

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t[0] != "eof":
            if t[1] == ")":
                raise ParseError("unbalanced parenthesis", t[2], self.src)
            raise ParseError(f"unexpected token {t[1]!r}", t[2], self.src)
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else _negate(t))
        return terms[0] if len(terms) == 1 else Add(*terms)

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self) -> Expr:
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return _negate(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            n = self.take()
            if n[0] != "num" or not n[1].isdigit():
                raise ParseError("exponent must be an integer literal", n[2], self.src)
            return Pow(base, sign * int(n[1]))
        return base

    def atom(self) -> Expr:
        kind, text, off = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise ParseError(f"unknown function {text!r}", off, self.src)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Func(text, arg)
            if text == "pi":
                return Const(math.pi)
            return Var(text)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "eof":
            raise ParseError("unexpected end of input", off, self.src)
        if text == ")":
            raise ParseError("unbalanced parenthesis", off, self.src)
        raise ParseError(f"unexpected token {text!r}", off, self.src)


def parse(src: str) -> Expr:
    """Parse ``src``; raises :class:`ParseError` carrying the byte offset."""
    return _Parser(src).parse()


# ------------------------------------------------------------------ printing

_ADD, _MUL, _UNARY, _ATOM = 1, 2, 3, 4


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    """Infix text that :func:`parse` maps back onto the identical tree."""
    return _p(e, _ADD)


def _wrap(s: str, own: int, ctx: int) -> str:
    return f"({s})" if own < ctx else s


def _p(e: Expr, ctx: int) -> str:
    op = e.op
    if op == "const":
        s = _fmt_num(e.value)
        # a negative literal is a unary form; it may not sit under "^"
        return _wrap(s, _UNARY if e.value < 0 else _ATOM, ctx)
    if op == "var":
        return e.value
    if op == "func":
        return f"{e.value}({_p(e.args[0], _ADD)})"
    if op == "pow":
        base = e.args[0]
        b = _p(base, _ADD)
        if not (base.op in ("var", "func") or (base.op == "const" and base.value >= 0)):
            b = f"({b})"
        return f"{b}^{e.value}"
    if op == "add":
        parts = [_p(e.args[0], _MUL)]
        for t in e.args[1:]:
            if t.op == "const" and t.value < 0:
                parts.append(" - " + _fmt_num(-t.value))
            elif t.op == "mul" and t.args[0].op == "const" and t.args[0].value < 0:
                flipped = Mul(Const(-t.args[0].value), *t.args[1:])
                parts.append(" - " + _p(flipped, _MUL))
            else:
                parts.append(" + " + _p(t, _MUL))
        return _wrap("".join(parts), _ADD, ctx)
    if op == "mul":
        first = e.args[0]
        out = [_p(first, _UNARY)]
        for f in e.args[1:]:
            # a quotient after the first factor would re-associate
            out.append(f"({_p(f, _ADD)})" if f.op == "div" else _p(f, _UNARY))
        return _wrap("*".join(out), _MUL, ctx)
    if op == "div":
        num, den = e.args
        left = _p(num, _UNARY) if num.op not in ("mul", "div") else _p(num, _MUL)
        right = _p(den, _UNARY)
        if den.op in ("mul", "div", "add") or (den.op == "const" and den.value < 0):
            right = f"({_p(den, _ADD)})"
        return _wrap(f"{left}/{right}", _MUL, ctx)
    raise ValueError(op)
