import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from golden import HEAT_A, HEAT_A1, HEAT_ADJOINT, NS_A, NS_ADJOINT
from lieopt import linalg
from lieopt.adjoint import (NonIntegerSpectrum, adjoint_factor, adjoint_table, apply_adjoint,
                            general_adjoint_matrix, inverse_adjoint_matrix, numeric_adjoint)
from lieopt.algebra import ad_matrix, bracket, load_algebra
from lieopt.exppoly import ep_equal, ep_eval, parse_exppoly
from lieopt.fixtures import builtin_algebra


@pytest.mark.parametrize("name, golden", [("heat6", HEAT_ADJOINT), ("ns4", NS_ADJOINT)])
def test_adjoint_table_matches_reference(name, golden):
    table = adjoint_table(builtin_algebra(name))
    for i, row in enumerate(golden):
        for j, cell in enumerate(row):
            assert parse_exppoly(table[i][j]) == parse_exppoly(cell), (i + 1, j + 1)


def test_heat_general_matrix_entries(heat):
    A = general_adjoint_matrix(heat)
    for (i, j), text in HEAT_A.items():
        assert ep_equal(A.entry(i, j), parse_exppoly(text)), (i, j)


def test_ns_general_matrix(ns):
    A = general_adjoint_matrix(ns)
    for i, row in enumerate(NS_A):
        for j, text in enumerate(row):
            assert ep_equal(A.entry(i + 1, j + 1), parse_exppoly(text))


def test_heat_first_factor(heat):
    F = adjoint_factor(heat, 1).matrix
    for i, row in enumerate(HEAT_A1):
        for j, text in enumerate(row):
            assert ep_equal(F[i][j], parse_exppoly(text))


@pytest.mark.parametrize("name", ["heat6", "ns4"])
def test_factors_equal_matrix_exponential(name):
    # row convention: coefficients of Ad_{exp(eps v_i)} w are a @ expm(-eps ad(v_i))^T
    L = builtin_algebra(name)
    eps = sympy.Symbol("eps", real=True)
    for i in range(L.dim):
        ad = sympy.Matrix(ad_matrix(L, L.basis_vector(i)))
        want = (-eps * ad.T).exp()
        got = adjoint_factor(L, i + 1, "eps").matrix
        for r in range(L.dim):
            for c in range(L.dim):
                for val in (Fraction(-3, 2), Fraction(1, 3), Fraction(2)):
                    x = float(want[r, c].subs(eps, sympy.Rational(val.numerator, val.denominator)))
                    assert math.isclose(ep_eval(got[r][c], {"eps": float(val)}), x, rel_tol=1e-12, abs_tol=1e-12)


eps_st = st.floats(-1.5, 1.5)


@settings(max_examples=30)
@given(st.integers(1, 6), eps_st, eps_st)
def test_one_parameter_group_law(i, s, t):
    L = builtin_algebra("heat6")
    F = adjoint_factor(L, i, "e").matrix

    def num(x):
        return np.array([[ep_eval(c, {"e": x}) for c in row] for row in F])

    assert np.allclose(num(s) @ num(t), num(s + t), atol=1e-10)


@settings(max_examples=30)
@given(st.integers(1, 6), eps_st)
def test_determinant_is_exponential_of_trace(i, s):
    L = builtin_algebra("heat6")
    F = adjoint_factor(L, i, "e").matrix
    M = np.array([[ep_eval(c, {"e": s}) for c in row] for row in F])
    tr = float(linalg.trace(ad_matrix(L, L.basis_vector(i - 1))))
    assert math.isclose(np.linalg.det(M), math.exp(-s * tr), rel_tol=1e-9)


vec6 = st.lists(st.floats(-2, 2), min_size=6, max_size=6)


@settings(max_examples=40)
@given(vec6, vec6, st.lists(eps_st, min_size=6, max_size=6))
def test_adjoint_action_is_an_automorphism(x, y, eps):
    L = builtin_algebra("heat6")
    lhs = apply_adjoint(L, bracket(L, x, y), eps)
    rhs = bracket(L, list(apply_adjoint(L, x, eps)), list(apply_adjoint(L, y, eps)))
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_inverse_matrix_is_exact(ns):
    G = general_adjoint_matrix(ns).matrix
    H = inverse_adjoint_matrix(ns).matrix
    n = ns.dim
    for i in range(n):
        for j in range(n):
            s = sum((G[i][k] * H[k][j] for k in range(n)), parse_exppoly("0"))
            assert ep_equal(s, parse_exppoly("1" if i == j else "0"))


def test_numeric_adjoint_matches_symbolic(heat):
    num = numeric_adjoint(heat)
    eps = [0.3, -0.7, 1.1, 0.4, -0.2, 0.9]
    at = {f"eps{i + 1}": e for i, e in enumerate(eps)}
    A = general_adjoint_matrix(heat)
    want = np.array([[ep_eval(A.entry(i, j), at) for j in range(1, 7)] for i in range(1, 7)])
    assert np.allclose(num.A(eps), want, rtol=1e-13)
    assert np.allclose(num.A(eps) @ num.Ainv(eps), np.eye(6), atol=1e-12)


@pytest.mark.parametrize("brackets", [
    [{"i": 1, "j": 2, "coeffs": {"3": "1"}}, {"i": 1, "j": 3, "coeffs": {"2": "-1"}}],
    [{"i": 1, "j": 2, "coeffs": {"2": "1/2"}}],
])
def test_non_integer_spectrum_is_reported(brackets):
    L = load_algebra({"dim": 3, "brackets": brackets})
    with pytest.raises(NonIntegerSpectrum):
        general_adjoint_matrix(L)


def test_apply_adjoint_reports_unbound_parameters(ns):
    with pytest.raises(KeyError):
        apply_adjoint(ns, [1, 0, 0, 0], {"eps1": 0.1})


def test_heat_rotation_is_a_group_element(heat):
    from lieopt.adjoint import is_automorphism
    from lieopt.fixtures import fixed_elements
    (z,) = fixed_elements("heat6")
    ad = sympy.Matrix(ad_matrix(heat, [0, Fraction(1, 4), 0, 0, 0, 1]))
    exact = (-sympy.pi * ad.T).exp().applyfunc(sympy.simplify)
    assert exact == sympy.Matrix(z.matrix)
    assert is_automorphism(heat, z.matrix)
    assert not is_automorphism(heat, [[2 if i == j == 0 else int(i == j) for j in range(6)] for i in range(6)])
