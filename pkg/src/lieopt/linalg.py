"""Exact linear algebra over the rationals.

Matrices are plain lists of rows holding :class:`fractions.Fraction` values.
Everything here is small and dense; the algebras of interest have dimension
at most a dozen, while the polynomial coefficient spaces used by the
semi-invariant search reach a few hundred columns.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

Matrix = List[List[Fraction]]
Vector = List[Fraction]


def frac_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def zeros(nrows: int, ncols: int) -> Matrix:
    return [[Fraction(0)] * ncols for _ in range(nrows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def transpose(m: Matrix) -> Matrix:
    return [list(col) for col in zip(*m)] if m else []


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    out = []
    for row in a:
        out.append([sum((x * y for x, y in zip(row, col) if x and y), Fraction(0)) for col in bt])
    return out


def matvec(a: Matrix, v: Sequence[Fraction]) -> Vector:
    return [sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)) for row in a]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(a: Matrix, s) -> Matrix:
    s = Fraction(s)
    return [[s * x for x in row] for row in a]


def is_zero(m: Matrix) -> bool:
    return all(x == 0 for row in m for x in row)


def trace(m: Matrix) -> Fraction:
    return sum((m[i][i] for i in range(len(m))), Fraction(0))


def rref(m: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    r = [list(row) for row in m]
    nrows = len(r)
    ncols = len(r[0]) if nrows else 0
    pivots: List[int] = []
    prow = 0
    for c in range(ncols):
        if prow >= nrows:
            break
        sel = next((i for i in range(prow, nrows) if r[i][c] != 0), None)
        if sel is None:
            continue
        r[prow], r[sel] = r[sel], r[prow]
        p = r[prow][c]
        if p != 1:
            r[prow] = [x / p for x in r[prow]]
        pr = r[prow]
        nz = [j for j in range(c, ncols) if pr[j] != 0]
        for i in range(nrows):
            if i != prow:
                f = r[i][c]
                if f != 0:
                    ri = r[i]
                    for j in nz:
                        ri[j] -= f * pr[j]
        pivots.append(c)
        prow += 1
    return r, pivots


def rank(m: Matrix) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def nullspace(m: Matrix, ncols: int | None = None) -> List[Vector]:
    """Basis of {x : m x = 0}, one vector per free column, in column order."""
    if ncols is None:
        ncols = len(m[0]) if m else 0
    if not m:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    r, pivots = rref(m)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(r, pivots):
            v[pc] = -row[free]
        basis.append(v)
    return basis


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in r[:n]]


def solve(m: Matrix, rhs: Sequence[Fraction]) -> Vector | None:
    """One solution of m x = rhs, or None if the system is inconsistent."""
    ncols = len(m[0])
    aug = [list(row) + [Fraction(b)] for row, b in zip(m, rhs)]
    r, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, pc in zip(r, pivots):
        x[pc] = row[ncols]
    return x


def matpow(m: Matrix, k: int) -> Matrix:
    out = identity(len(m))
    for _ in range(k):
        out = matmul(out, m)
    return out


def charpoly(m: Matrix) -> List[Fraction]:
    """Coefficients [c_0, ..., c_n] of det(x I - m), lowest degree first.

    Faddeev-LeVerrier recursion; exact over Q.
    """
    n = len(m)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = zeros(n, n)
    for k in range(1, n + 1):
        # M_k = A (M_{k-1} + c_{n-k+1} I)
        shifted = [list(row) for row in mk]
        for i in range(n):
            shifted[i][i] += coeffs[n - k + 1]
        mk = matmul(m, shifted)
        coeffs[n - k] = -trace(mk) / k
    return coeffs


def _divisors(n: int) -> List[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _deflate(coeffs: List[Fraction], root: int) -> List[Fraction]:
    # synthetic division of sum c_i x^i by (x - root); coeffs lowest first
    n = len(coeffs) - 1
    out = [Fraction(0)] * n
    carry = Fraction(0)
    for i in range(n, 0, -1):
        carry = coeffs[i] + carry * root
        out[i - 1] = carry
    return out


def _peval(coeffs: Sequence[Fraction], x) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def integer_roots(coeffs: Sequence[Fraction]) -> Tuple[List[Tuple[int, int]], List[Fraction]]:
    """Split a polynomial into integer roots with multiplicity and a leftover factor.

    Returns ``(roots, rest)`` where ``roots`` lists ``(root, multiplicity)``
    sorted by root and ``rest`` is the cofactor (lowest degree first) that
    has no integer roots. ``rest == [1]`` means the spectrum is integral.
    """
    poly = [Fraction(c) for c in coeffs]
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    lead = poly[-1]
    poly = [c / lead for c in poly]
    found: dict[int, int] = {}
    while len(poly) > 1 and poly[0] == 0:
        found[0] = found.get(0, 0) + 1
        poly = poly[1:]
    while len(poly) > 1:
        den = 1
        for c in poly:
            den = den * c.denominator // gcd(den, c.denominator)
        const = int(poly[0] * den)
        hit = None
        for d in _divisors(const):
            for cand in (d, -d):
                if _peval(poly, cand) == 0:
                    hit = cand
                    break
            if hit is not None:
                break
        if hit is None:
            break
        found[hit] = found.get(hit, 0) + 1
        poly = _deflate(poly, hit)
    return sorted(found.items()), poly


def format_poly(coeffs: Sequence[Fraction], var: str = "x") -> str:
    terms = []
    for deg in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[deg])
        if c == 0:
            continue
        mag = abs(c)
        if deg == 0:
            body = str(mag)
        else:
            pw = var if deg == 1 else f"{var}^{deg}"
            body = pw if mag == 1 else f"{mag}*{pw}"
        if not terms:
            terms.append(("-" if c < 0 else "") + body)
        else:
            terms.append((" - " if c < 0 else " + ") + body)
    return "".join(terms) or "0"
