"""Closed-form real expressions: parse, differentiate, simplify, evaluate."""
from .calculus import (
    DomainError,
    UnboundVariableError,
    compile_exprs,
    diff,
    evaluate,
    free_symbols,
    node_count,
    simplify,
    substitute,
)
from .core import (
    FUNCTIONS,
    INTERNER,
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Expr,
    Func,
    Mul,
    Pow,
    Var,
    add,
    as_expr,
    cos,
    exp,
    mul,
    power,
    sin,
    sqrt,
)
from .parser import ParseError, parse, to_text

__all__ = [
    "Add", "Const", "Div", "DomainError", "Expr", "FUNCTIONS", "Func", "INTERNER", "Mul",
    "ONE", "ParseError", "Pow", "UnboundVariableError", "Var", "ZERO", "add", "as_expr",
    "compile_exprs", "cos", "diff", "evaluate", "exp", "free_symbols", "mul", "node_count",
    "parse", "power", "simplify", "sin", "sqrt", "substitute", "to_text",
]
