from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import to_sympy
from jetcas.errors import CyclicSubstitution, UnboundSymbol
from jetcas.expr import (ONE, ZERO, Expr, coord, evaluate, format_expr, func, jet, normalize,
                         param, partial, substitute, total_derivative)

BASE = ("x", "y")
ATOMS = [jet("u"), jet("v"), jet("u", "x"), jet("u", "y"), jet("v", "x"), jet("u", "x", "y"),
         jet("v", "y", "y"), coord("x"), coord("y"), param("a"), func("f", ("x",)), func("g", BASE, ("y",))]


@st.composite
def exprs(draw, max_terms=4):
    f = ZERO
    for _ in range(draw(st.integers(0, max_terms))):
        c = Fraction(draw(st.integers(-6, 6)), draw(st.integers(1, 4)))
        t = Expr.const(c)
        for _ in range(draw(st.integers(0, 3))):
            t = t * Expr.sym(draw(st.sampled_from(ATOMS)))
        f = f + t
    return f


u, ux, ut = Expr.sym(jet("u")), Expr.sym(jet("u", "x")), Expr.sym(jet("u", "t"))


def test_partial_examples():
    assert partial(ux - u, jet("u", "x")) == ONE
    u1, u1x = Expr.sym(jet("u1")), Expr.sym(jet("u1", "x1"))
    assert partial(u1 * u1x, jet("u1", "x1")) == u1
    assert partial(Expr.const(7), jet("u")).is_zero


def test_total_derivative_examples():
    assert total_derivative(ut - u, "t") == Expr.sym(jet("u", "t", "t")) - ut
    assert total_derivative(Expr.const(3), "x").is_zero
    f = u * ux
    assert total_derivative(total_derivative(f, "x"), "t") == total_derivative(total_derivative(f, "t"), "x")


def test_jets_are_symmetric():
    assert jet("u", "x", "y") == jet("u", "y", "x")
    assert func("p", ("x1", "x2"), ("x2", "x1")) == func("p", ("x1", "x2"), ("x1", "x2"))


def test_substitute():
    assert substitute(ut - u, {jet("u", "t"): u}).is_zero
    f = ux * u + 3
    assert substitute(f, {}) == f
    with pytest.raises(CyclicSubstitution):
        substitute(u, {jet("u"): ux, jet("u", "x"): u + 1}, repeat=True)


def test_evaluate_and_unbound():
    f = ux * u + Expr.sym(param("a"))
    assert evaluate(f, {jet("u"): 2, jet("u", "x"): Fraction(1, 3), param("a"): 1}) == Fraction(5, 3)
    with pytest.raises(UnboundSymbol):
        evaluate(f, {jet("u"): 2})


def test_parameters_invert():
    a = Expr.sym(param("rho"))
    assert (a * a.inverse()) == ONE
    assert format_expr(Expr.sym(func("p", ("x1",), ("x1",))) / a) == "p_x1*rho^(-1)"


@settings(max_examples=200, deadline=None)
@given(exprs(), exprs(), st.sampled_from(BASE))
def test_leibniz(f, g, v):
    assert total_derivative(f * g, v) == f * total_derivative(g, v) + g * total_derivative(f, v)


@settings(max_examples=200, deadline=None)
@given(exprs())
def test_total_derivatives_commute(f):
    assert total_derivative(total_derivative(f, "x"), "y") == total_derivative(total_derivative(f, "y"), "x")


@settings(max_examples=100, deadline=None)
@given(exprs(), st.sampled_from(BASE))
def test_total_derivative_matches_sympy(f, v):
    lhs = to_sympy(total_derivative(f, v), BASE)
    rhs = sp.diff(to_sympy(f, BASE), sp.Symbol(v))
    assert sp.expand(lhs - rhs) == 0


@settings(max_examples=100, deadline=None)
@given(exprs(), exprs())
def test_ring_axioms_match_sympy(f, g):
    assert sp.expand(to_sympy(f * g + f, BASE) - to_sympy(f, BASE) * (to_sympy(g, BASE) + 1)) == 0
    assert f * g == g * f and f + g == g + f
    assert (f * ZERO).is_zero and (f - f).is_zero


@settings(max_examples=100, deadline=None)
@given(exprs())
def test_normalize_idempotent(f):
    assert normalize(normalize(f)) == normalize(f)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([jet("u"), jet("v"), coord("x"), param("a")]), max_size=4),
       st.sampled_from(BASE))
def test_chain_rule_on_order_zero(atoms, v):
    # f with no derivative jets: D_v f = df/dv + sum_j u^j_v df/du^j
    f = ONE + Expr.sym(jet("u"))
    for a in atoms:
        f = f * Expr.sym(a) + 1
    expected = partial(f, coord(v))
    for dep in ("u", "v"):
        expected = expected + Expr.sym(jet(dep, v)) * partial(f, jet(dep))
    assert total_derivative(f, v) == expected
