import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from lieopt.exppoly import ExpPoly, ParseError, ep_equal, ep_eval, ep_mul, parse_exppoly

VARS = ["eps1", "eps2", "eps3"]


@st.composite
def monomials(draw):
    p = ExpPoly.const(draw(st.fractions(min_value=-4, max_value=4, max_denominator=3)))
    for v in VARS:
        k = draw(st.integers(0, 2))
        if k:
            p = p * ExpPoly.var(v, k)
        q = draw(st.integers(-2, 2))
        if q:
            p = p * ExpPoly.exp(v, q)
    return p


@st.composite
def exppolys(draw):
    terms = draw(st.lists(monomials(), min_size=0, max_size=4))
    out = ExpPoly()
    for t in terms:
        out = out + t
    return out


points = st.fixed_dictionaries({v: st.floats(-1.5, 1.5) for v in VARS})


def to_sympy(p: ExpPoly):
    return sympy.sympify(str(p).replace("^", "**"), locals={v: sympy.Symbol(v) for v in VARS})


@given(exppolys(), exppolys(), exppolys())
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert ep_mul(p, q) == ep_mul(q, p)
    assert (p + q) + r == p + (q + r)
    assert ep_mul(ep_mul(p, q), r) == ep_mul(p, ep_mul(q, r))
    assert ep_mul(p, q + r) == ep_mul(p, q) + ep_mul(p, r)
    assert (p - p).is_zero()
    assert ep_mul(p, ExpPoly.const(1)) == p


@given(exppolys())
def test_render_parse_round_trip(p):
    assert ep_equal(parse_exppoly(str(p)), p)


@settings(max_examples=50)
@given(exppolys(), exppolys(), points)
def test_evaluation_agrees_with_sympy(p, q, at):
    expr = to_sympy(ep_mul(p, q))
    want = float(expr.subs({sympy.Symbol(k): v for k, v in at.items()}))
    got = ep_eval(ep_mul(p, q), at)
    assert math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=50)
@given(exppolys())
def test_derivative_agrees_with_sympy(p):
    d = p.diff("eps1")
    assert sympy.simplify(to_sympy(d) - sympy.diff(to_sympy(p), sympy.Symbol("eps1"))) == 0


def test_exp_products_are_canonical():
    a = parse_exppoly("exp(eps1)*exp(eps1)")
    assert a == ExpPoly.exp("eps1", 2)
    assert parse_exppoly("exp(eps1)*exp(-eps1)") == ExpPoly.const(1)
    assert parse_exppoly("exp(2*eps4)") == parse_exppoly("exp(eps4)^2")
    assert parse_exppoly("(eps1 + 1)^2") == parse_exppoly("eps1^2 + 2*eps1 + 1")
    assert ep_equal(parse_exppoly("1/2*eps2"), ExpPoly.var("eps2").scale(Fraction(1, 2)))


@pytest.mark.parametrize("text", ["exp(eps1^2)", "eps1^-1", "1/eps1", "exp(1/2*eps1)", "eps1 +", "sin(eps1)"])
def test_parse_rejects_non_exppoly(text):
    with pytest.raises(ParseError):
        parse_exppoly(text)
