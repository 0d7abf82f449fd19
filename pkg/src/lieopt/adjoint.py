"""Adjoint factors exp(-eps*ad v_i) and the general adjoint matrix.

Convention (used everywhere in the package): a coefficient row vector
``a = (a_1..a_n)`` of ``w = sum a_i v_i`` transforms as ``a -> a @ A``.
Row ``j`` of the factor for generator ``i`` therefore holds the
coordinates of ``Ad_{exp(eps v_i)} v_j = exp(-eps ad_{v_i}) v_j``; this is
the transpose of the column-convention matrix ``exp(-eps * ad_matrix(v_i))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from . import linalg
from .algebra import LieAlgebra, ad_matrix, bracket, format_element, render_grid
from .exppoly import ExpPoly, compile_exppolys

EPMatrix = List[List[ExpPoly]]


class NonIntegerSpectrum(ValueError):
    """ad(v_i) has an eigenvalue that is not an integer."""

    def __init__(self, generator: int, factor: Sequence[Fraction]):
        self.generator = generator
        self.factor = list(factor)
        super().__init__(
            f"ad(v{generator}) has non-integer eigenvalues; characteristic polynomial "
            f"keeps the factor {linalg.format_poly(self.factor)}. Only algebras whose "
            "ad-matrices have integer spectra are supported."
        )


@dataclass(frozen=True)
class AdjointFactor:
    generator: int  # 1-based
    variable: str
    matrix: Tuple[Tuple[ExpPoly, ...], ...]


@dataclass(frozen=True)
class GeneralAdjointMatrix:
    order: Tuple[int, ...]  # 1-based generator indices, left to right
    variables: Tuple[str, ...]
    matrix: Tuple[Tuple[ExpPoly, ...], ...]

    def entry(self, i: int, j: int) -> ExpPoly:
        """1-based entry a_ij."""
        return self.matrix[i - 1][j - 1]


def ep_matmul(a: EPMatrix, b: EPMatrix) -> EPMatrix:
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = ExpPoly()
            for k in range(m):
                x, y = a[i][k], b[k][j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def _spectral_split(M: linalg.Matrix, generator: int):
    """Projections onto generalized eigenspaces and the nilpotent part of M."""
    n = len(M)
    roots, rest = linalg.integer_roots(linalg.charpoly(M))
    if len(rest) > 1:
        raise NonIntegerSpectrum(generator, rest)
    blocks = []
    cols: List[List[Fraction]] = []
    for lam, mult in roots:
        shifted = linalg.sub(M, linalg.scale(linalg.identity(n), lam))
        basis = linalg.nullspace(linalg.matpow(shifted, mult), n)
        if len(basis) != mult:
            raise ArithmeticError("generalized eigenspace has the wrong dimension")
        blocks.append((lam, len(cols), len(cols) + mult))
        cols.extend(basis)
    V = linalg.transpose(cols)
    Vinv = linalg.inverse(V)
    projections = []
    S = linalg.zeros(n, n)
    for lam, lo, hi in blocks:
        E = linalg.zeros(n, n)
        for k in range(lo, hi):
            E[k][k] = Fraction(1)
        P = linalg.matmul(linalg.matmul(V, E), Vinv)
        projections.append((lam, P))
        S = linalg.add(S, linalg.scale(P, lam))
    N = linalg.sub(M, S)
    return projections, N


def exp_minus_eps(M: linalg.Matrix, variable: str, generator: int = 0) -> EPMatrix:
    """exp(-eps*M) with entries in the exp-polynomial ring (column convention)."""
    n = len(M)
    projections, N = _spectral_split(M, generator)
    eps = ExpPoly.var(variable)
    # nilpotent series sum (-eps)^k N^k / k!
    series = [[ExpPoly.const(int(i == j)) for j in range(n)] for i in range(n)]
    Nk = linalg.identity(n)
    k = 0
    while True:
        k += 1
        Nk = linalg.matmul(Nk, N)
        if linalg.is_zero(Nk):
            break
        if k > n:
            raise ArithmeticError("nilpotent part failed to vanish")
        coef = (-eps) ** k
        scale = Fraction(1, math.factorial(k))
        for i in range(n):
            for j in range(n):
                if Nk[i][j]:
                    series[i][j] = series[i][j] + coef.scale(Nk[i][j] * scale)
    semisimple = [[ExpPoly() for _ in range(n)] for _ in range(n)]
    for lam, P in projections:
        e = ExpPoly.exp(variable, -lam)
        for i in range(n):
            for j in range(n):
                if P[i][j]:
                    semisimple[i][j] = semisimple[i][j] + e.scale(P[i][j])
    return ep_matmul(semisimple, series)


def adjoint_factor(L: LieAlgebra, i: int, variable: str | None = None) -> AdjointFactor:
    """Row-convention matrix of Ad_{exp(eps_i v_i)}; ``i`` is 1-based."""
    if not 1 <= i <= L.dim:
        raise ValueError(f"generator index {i} out of range 1..{L.dim}")
    variable = variable or f"eps{i}"
    M = ad_matrix(L, L.basis_vector(i - 1))
    E = exp_minus_eps(M, variable, i)
    rows = tuple(tuple(E[r][c] for r in range(L.dim)) for c in range(L.dim))  # transpose
    return AdjointFactor(generator=i, variable=variable, matrix=rows)


def _check_order(L: LieAlgebra, order) -> Tuple[int, ...]:
    if order is None:
        return tuple(range(1, L.dim + 1))
    order = tuple(int(k) for k in order)
    if sorted(order) != list(range(1, L.dim + 1)):
        raise ValueError(f"order must be a permutation of 1..{L.dim}, got {order}")
    return order


def general_adjoint_matrix(L: LieAlgebra, order: Sequence[int] | None = None) -> GeneralAdjointMatrix:
    return _general_adjoint_cached(L, _check_order(L, order))


@lru_cache(maxsize=32)
def _general_adjoint_cached(L: LieAlgebra, order: Tuple[int, ...]) -> GeneralAdjointMatrix:
    prod: EPMatrix | None = None
    for i in order:
        F = [list(r) for r in adjoint_factor(L, i).matrix]
        prod = F if prod is None else ep_matmul(prod, F)
    return GeneralAdjointMatrix(order=order, variables=tuple(f"eps{i}" for i in range(1, L.dim + 1)),
                                matrix=tuple(tuple(r) for r in prod))


def inverse_adjoint_matrix(L: LieAlgebra, order: Sequence[int] | None = None) -> GeneralAdjointMatrix:
    """Exact inverse of the general matrix: the factors at -eps_i in reverse order."""
    order = _check_order(L, order)
    prod: EPMatrix | None = None
    for i in reversed(order):
        var = f"eps{i}"
        F = [[_negate_var(e, var) for e in r] for r in adjoint_factor(L, i, var).matrix]
        prod = F if prod is None else ep_matmul(prod, F)
    return GeneralAdjointMatrix(order=tuple(reversed(order)),
                                variables=tuple(f"eps{i}" for i in range(1, L.dim + 1)),
                                matrix=tuple(tuple(r) for r in prod))


def _negate_var(p: ExpPoly, var: str) -> ExpPoly:
    # p(var -> -var), keeping canonical keys
    terms = {}
    for (mono, expo), c in p.items():
        sign = (-1) ** dict(mono).get(var, 0)
        e2 = tuple((v, -q if v == var else q) for v, q in expo)
        terms[(mono, e2)] = c * sign
    return ExpPoly(terms)


def substitute_zero(M, variables) -> EPMatrix:
    zero = {v: 0 for v in variables}
    return [[e.subs(zero) for e in row] for row in M]


# -- numerics -----------------------------------------------------------------

class NumericAdjoint:
    """Compiled evaluator of A(eps), its inverse and the partial derivatives."""

    def __init__(self, L: LieAlgebra, order: Sequence[int] | None = None):
        self.dim = L.dim
        G = general_adjoint_matrix(L, order)
        H = inverse_adjoint_matrix(L, order)
        self.variables = list(G.variables)
        flat = [e for r in G.matrix for e in r]
        iflat = [e for r in H.matrix for e in r]
        self._A = compile_exppolys(flat, self.variables)
        self._Ainv = compile_exppolys(iflat, self.variables)
        self._dA = compile_exppolys([e.diff(v) for v in self.variables for e in flat], self.variables)
        self._dAinv = compile_exppolys([e.diff(v) for v in self.variables for e in iflat], self.variables)
        self.symbolic = G
        self.symbolic_inverse = H

    def A(self, eps) -> np.ndarray:
        return self._A(np.asarray(eps, dtype=float)).reshape(self.dim, self.dim)

    def Ainv(self, eps) -> np.ndarray:
        return self._Ainv(np.asarray(eps, dtype=float)).reshape(self.dim, self.dim)

    def dA(self, eps) -> np.ndarray:
        """Array of shape (n, n, n): dA[j] = dA/d eps_{j+1}."""
        return self._dA(np.asarray(eps, dtype=float)).reshape(self.dim, self.dim, self.dim)

    def dAinv(self, eps) -> np.ndarray:
        return self._dAinv(np.asarray(eps, dtype=float)).reshape(self.dim, self.dim, self.dim)


@lru_cache(maxsize=16)
def numeric_adjoint(L: LieAlgebra, order: Tuple[int, ...] | None = None) -> NumericAdjoint:
    return NumericAdjoint(L, order)


def apply_adjoint(L: LieAlgebra, w: Sequence, eps, order: Sequence[int] | None = None) -> np.ndarray:
    """Numeric coefficients of Ad_g(w) for g given by eps (sequence or mapping eps1..epsn)."""
    if len(w) != L.dim:
        raise ValueError(f"expected a vector of length {L.dim}")
    if isinstance(eps, dict):
        missing = [f"eps{i}" for i in range(1, L.dim + 1) if f"eps{i}" not in eps]
        if missing:
            raise KeyError(f"unbound variable(s): {', '.join(missing)}")
        eps = [eps[f"eps{i}"] for i in range(1, L.dim + 1)]
    if len(eps) != L.dim:
        raise ValueError(f"expected {L.dim} group parameters")
    num = numeric_adjoint(L, None if order is None else tuple(order))
    return np.asarray([float(x) for x in w]) @ num.A(eps)


def adjoint_table(L: LieAlgebra, variable: str = "eps") -> List[List[str]]:
    """Cell (i, j) renders Ad_{exp(eps v_i)}(v_j)."""
    grid = []
    for i in range(1, L.dim + 1):
        F = adjoint_factor(L, i, variable).matrix
        grid.append([format_element(L, F[j]) for j in range(L.dim)])
    return grid


def render_matrix(M) -> str:
    cells = [[str(e) for e in row] for row in M]
    n = len(cells)
    return render_grid([str(i + 1) for i in range(n)], [str(j + 1) for j in range(len(cells[0]))], cells)


def render_adjoint_table(L: LieAlgebra) -> str:
    return render_grid(list(L.basis), list(L.basis), adjoint_table(L), corner="Ad")


@dataclass(frozen=True)
class FixedElement:
    """An adjoint-group element given by an exact matrix (row convention, w -> w @ matrix).

    Used for elements outside the image of eps -> A(eps), such as
    exp(pi X) for X with imaginary spectrum, which A1...An cannot express.
    """

    label: str
    matrix: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(c) for c in row) for row in self.matrix))

    def inverse(self) -> linalg.Matrix:
        return linalg.inverse([list(r) for r in self.matrix])


def is_automorphism(L: LieAlgebra, M: Sequence[Sequence[Fraction]]) -> bool:
    """Exact check that w -> w @ M is invertible and preserves brackets on basis pairs."""
    M = [list(map(Fraction, r)) for r in M]
    if len(M) != L.dim or linalg.rank(M) < L.dim:
        return False
    rows = [M[i] for i in range(L.dim)]

    def image(v):
        return linalg.matvec(linalg.transpose(M), v)

    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            if bracket(L, rows[i], rows[j]) != image(L.bracket_basis(i, j)):
                return False
    return True
