import numpy as np
import pytest

from bochner_lab.expr import parse
from bochner_lab.tensor import ExpressionBudgetExceeded, Jet, Sym, SymbolicInverseUnavailable, ein

VARS = ("u", "v")
A_SRC = [["1 + u^2", "sin(v)"], ["u*v", "2 + cos(u)"]]
B_SRC = [["exp(u/3)", "v"], ["u - v", "1 + v^2"]]
PTS = np.array([[0.3, -0.2], [1.1, 0.7], [-0.5, 0.4]])


def exprs(src):
    return np.array([[parse(s) for s in row] for row in src], dtype=object)


def both(src, order=3):
    a = exprs(src)
    return Jet.from_exprs(a, VARS, PTS, order), Sym(a, VARS)


def assert_parts_match(jet, sym):
    """Every stored derivative order of the jet equals the symbolic derivative."""
    s = sym
    for r, part in enumerate(jet.parts):
        np.testing.assert_allclose(part, s.evaluate(PTS), rtol=1e-11, atol=1e-11)
        if r < jet.order:
            s = s.d()


def test_jet_derivatives_match_symbolic():
    J, S = both(A_SRC)
    assert_parts_match(J, S)


@pytest.mark.parametrize("sub", ["ij,jk->ik", "ij,kj->ik", "ij,ij->", "ii,jk->jk", "ij,jk->ki"])
def test_product_rule_through_ein(sub):
    JA, SA = both(A_SRC)
    JB, SB = both(B_SRC)
    assert_parts_match(ein(sub, JA, JB), ein(sub, SA, SB))


def test_ein_values_match_numpy():
    JA, _ = both(A_SRC)
    JB, _ = both(B_SRC)
    C = np.array([[2.0, -1.0], [0.5, 3.0]])
    got = ein("ij,jk,kl->il", JA, C, JB).value
    want = np.einsum("pij,jk,pkl->pil", JA.value, C, JB.value)
    np.testing.assert_allclose(got, want, rtol=1e-13)


def test_single_operand_trace_and_transpose():
    JA, SA = both(A_SRC)
    assert_parts_match(ein("ii->", JA), ein("ii->", SA))
    assert_parts_match(ein("ij->ji", JA), ein("ij->ji", SA))


def test_matrix_inverse_jet_matches_symbolic():
    JA, SA = both(A_SRC)
    assert_parts_match(JA.inv(), SA.inv())


def test_scalar_reciprocal():
    a = parse("2 + sin(u)*v")
    J = Jet.from_exprs(a, VARS, PTS, 3)
    S = Sym(a, VARS)
    assert_parts_match(J.inv(), S.inv())


def test_constant_jet_has_zero_derivatives():
    J = Jet.constant(np.eye(2), 4, 2, order=2)
    assert J.npoints == 4 and J.order == 2
    assert not np.any(J.parts[1]) and not np.any(J.parts[2])


def test_derivative_axis_and_truncate():
    JA, _ = both(A_SRC)
    D = JA.d()
    assert D.tshape == (2, 2, 2) and D.order == 2
    assert JA.truncate(1).order == 1
    with pytest.raises(ValueError):
        JA.truncate(0).d()


def test_symbolic_inverse_refuses_large_matrices():
    big = Sym(np.eye(5), VARS)
    with pytest.raises(SymbolicInverseUnavailable):
        big.inv()


def test_expression_budget():
    a = Sym(exprs(A_SRC), VARS, budget=20)
    with pytest.raises(ExpressionBudgetExceeded):
        ein("ij,jk,kl->il", a, a, a)


def test_field_products_need_ein():
    JA, _ = both(A_SRC)
    with pytest.raises(TypeError):
        JA * JA
