"""Invariants of two-dimensional subalgebras under the adjoint action and mixing.

A function phi(a1..an, b1..bn) is invariant when it is unchanged by
Ad_g applied to both w1 and w2 and by invertible mixing of the pair. The
infinitesimal version is a system of first-order linear PDEs, one per
generator of the algebra and one per entry of the mixing matrix.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .adjoint import adjoint_factor, general_adjoint_matrix
from .algebra import LieAlgebra, bracket
from .exppoly import ExpPoly, ep_eval_ld
from .expr import RationalFunction, _content, coefficient_names, poly_eval_ld
from .subalgebra import Constraint, sample_constrained_pairs

MODES = ("zero", "nonzero")
SCALING_LABELS = ("a11", "a12", "a21", "a22")


def normalise_mode(mode: str) -> str:
    m = {"zero": "zero", "lambda_zero": "zero", "nonzero": "nonzero", "lambda_nonzero": "nonzero"}.get(mode)
    if m is None:
        raise ValueError(f"mode must be 'zero' or 'nonzero', got {mode!r}")
    return m


@dataclass(frozen=True)
class VectorFieldPDE:
    """X = sum_m coeffs[m] * d/dx_m with x = (a1..an, b1..bn); the PDE is X(phi) = 0."""

    label: str
    coeffs: Tuple[ExpPoly, ...]

    @property
    def is_scaling(self) -> bool:
        return self.label in SCALING_LABELS

    def variables(self) -> List[str]:
        return coefficient_names(len(self.coeffs) // 2)

    def apply(self, f) -> RationalFunction:
        f = RationalFunction.coerce(f)
        out = RationalFunction.make(0)
        for name, c in zip(self.variables(), self.coeffs):
            if c.is_zero() or name not in f.variables():
                continue
            out = out + f.diff(name) * c
        return out

    def apply_poly(self, p: ExpPoly) -> ExpPoly:
        out = ExpPoly()
        for name, c in zip(self.variables(), self.coeffs):
            if c:
                d = p.diff(name)
                if d:
                    out = out + c * d
        return out

    def render(self) -> str:
        parts = []
        for name, c in zip(self.variables(), self.coeffs):
            if c.is_zero():
                continue
            text = str(c)
            if len(c) > 1:
                text = f"({text})"
            term = f"{text}*phi_{name}"
            if not parts:
                parts.append(term)
            elif term.startswith("-"):
                parts.append(" - " + term[1:])
            else:
                parts.append(" + " + term)
        return "".join(parts) + " = 0"

    def proportional(self, other: "VectorFieldPDE") -> Optional[Fraction]:
        ratio = None
        for x, y in zip(self.coeffs, other.coeffs):
            if x.is_zero() != y.is_zero():
                return None
            if x.is_zero():
                continue
            key, cy = y.sorted_terms()[0]
            cx = x.terms.get(key)
            if cx is None:
                return None
            r = cx / cy
            if ratio is None:
                ratio = r
            elif r != ratio:
                return None
            if x != y.scale(r):
                return None
        return ratio


def invariant_pde_system(L: LieAlgebra, mode: str) -> List[VectorFieldPDE]:
    """Scaling fields a11, a21, a22, then generator fields c1..cn, then a12 (lambda = 0 only).

    Zero fields and fields proportional to an earlier one are dropped.
    """
    mode = normalise_mode(mode)
    n = L.dim
    a = [ExpPoly.var(f"a{i + 1}") for i in range(n)]
    b = [ExpPoly.var(f"b{i + 1}") for i in range(n)]
    zero = [ExpPoly()] * n
    fields = [
        VectorFieldPDE("a11", tuple(a + zero)),
        VectorFieldPDE("a21", tuple(zero + a)),
        VectorFieldPDE("a22", tuple(zero + b)),
    ]
    for k in range(n):
        e = L.basis_vector(k)
        ta = [-x for x in bracket(L, [ExpPoly.const(c) for c in e], a)]
        tb = [-x for x in bracket(L, [ExpPoly.const(c) for c in e], b)]
        fields.append(VectorFieldPDE(f"c{k + 1}", tuple(ta + tb)))
    if mode == "zero":
        fields.append(VectorFieldPDE("a12", tuple(b + zero)))
    out: List[VectorFieldPDE] = []
    for f in fields:
        if all(c.is_zero() for c in f.coeffs):
            continue
        if any(g.proportional(f) is not None for g in out):
            continue
        out.append(f)
    return out


# -- flows ------------------------------------------------------------------------

class _Flows:
    """Exact flows of the PDE fields, evaluated in extended precision."""

    def __init__(self, L: LieAlgebra):
        self.L = L
        self._factors = {k: adjoint_factor(L, k, "t").matrix for k in range(1, L.dim + 1)}
        self._general = general_adjoint_matrix(L).matrix

    def factor(self, k: int, t) -> np.ndarray:
        return np.array([[ep_eval_ld(e, {"t": t}) for e in row] for row in self._factors[k]], dtype=np.longdouble)

    def general(self, eps: Sequence) -> np.ndarray:
        at = {f"eps{i + 1}": e for i, e in enumerate(eps)}
        return np.array([[ep_eval_ld(e, at) for e in row] for row in self._general], dtype=np.longdouble)

    def flow(self, label: str, a: np.ndarray, b: np.ndarray, t) -> Tuple[np.ndarray, np.ndarray]:
        t = np.longdouble(t)
        if label == "a11":
            return a * np.exp(t), b
        if label == "a22":
            return a, b * np.exp(t)
        if label == "a21":
            return a, b + t * a
        if label == "a12":
            return a + t * b, b
        k = int(label[1:])
        F = self.factor(k, t)
        return a @ F, b @ F


def _values(n: int, a, b) -> Dict[str, np.longdouble]:
    return dict(zip(coefficient_names(n), list(a) + list(b)))


# -- checks --------------------------------------------------------------------------

@dataclass
class CheckReport:
    passed: bool
    mode: str
    exact: Dict[str, bool]
    failing: List[str] = field(default_factory=list)
    samples: int = 0
    fd_max_deviation: Optional[float] = None
    flow_max_deviation: Optional[float] = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "passed": self.passed, "mode": self.mode, "exact": self.exact, "failing": self.failing,
            "samples": self.samples, "fd_max_deviation": self.fd_max_deviation,
            "flow_max_deviation": self.flow_max_deviation, "note": self.note,
        }


def restrict_field(f: VectorFieldPDE, constraint: Constraint) -> Dict[str, RationalFunction]:
    """Components of the field along the free variables, with the constraint substituted."""
    n = len(f.coeffs) // 2
    fixed = {s for s, _ in constraint.subs}
    out = {}
    for name, c in zip(coefficient_names(n), f.coeffs):
        if name in fixed:
            continue
        out[name] = constraint.substitute(RationalFunction.make(c))
    return out


def _apply_restricted(components: Dict[str, RationalFunction], phi: RationalFunction) -> RationalFunction:
    out = RationalFunction.make(0)
    for name, c in components.items():
        if c.is_zero() or name not in phi.variables():
            continue
        out = out + phi.diff(name) * c
    return out


def check_invariant(L: LieAlgebra, phi, mode: str, constraint: Constraint | None = None,
                    samples: int = 100, seed: int = 0, step: float = 1e-5,
                    fd_tolerance: float = 1e-9, flow_tolerance: float = 1e-8,
                    flow_trials: int = 200) -> CheckReport:
    """Check that every field of the mode's PDE system annihilates phi.

    Without a constraint the check is exact and symbolic. With a constraint,
    phi and the fields are first restricted to the constraint's free
    variables and checked exactly; then, on seeded samples of the case,
    central differences along each field's flow and finite group actions
    (see ``flow_constancy``) give numeric deviations.
    """
    mode = normalise_mode(mode)
    phi = RationalFunction.coerce(phi)
    fields = invariant_pde_system(L, mode)
    exact: Dict[str, bool] = {}
    if constraint is None:
        for f in fields:
            exact[f.label] = f.apply(phi).is_zero()
        failing = [k for k, ok in exact.items() if not ok]
        return CheckReport(passed=not failing, mode=mode, exact=exact, failing=failing)

    restricted_phi = constraint.substitute(phi)
    for f in fields:
        exact[f.label] = _apply_restricted(restrict_field(f, constraint), restricted_phi).is_zero()
    pts = sample_constrained_pairs(L, constraint, samples, seed)
    flows = _Flows(L)
    n = L.dim
    fd_dev = 0.0
    used = 0
    for s in pts:
        a = np.array([np.longdouble(x.numerator) / x.denominator for x in s.pair.a])
        b = np.array([np.longdouble(x.numerator) / x.denominator for x in s.pair.b])
        try:
            phi.eval_ld(_values(n, a, b))
        except ZeroDivisionError:
            continue
        used += 1
        for f in fields:
            ap, bp = flows.flow(f.label, a, b, step)
            am, bm = flows.flow(f.label, a, b, -step)
            try:
                d = (phi.eval_ld(_values(n, ap, bp)) - phi.eval_ld(_values(n, am, bm))) / (2 * np.longdouble(step))
            except ZeroDivisionError:
                continue
            fd_dev = max(fd_dev, float(abs(d)))
    flow_dev = 0.0
    for i, s in enumerate(pts[: max(1, flow_trials // 20)]):
        flow_dev = max(flow_dev, flow_constancy(L, phi, s.pair, trials=20, seed=seed + i, mode=mode))
    failing = [k for k, ok in exact.items() if not ok]
    passed = not failing and fd_dev < fd_tolerance and flow_dev < flow_tolerance
    if not pts:
        passed = False
    if used == 0:
        raise ZeroDivisionError("the invariant's denominator vanishes on every sample of the constraint set")
    return CheckReport(passed=passed, mode=mode, exact=exact, failing=failing, samples=used,
                       fd_max_deviation=fd_dev, flow_max_deviation=flow_dev)


class PoleError(ArithmeticError):
    pass


def random_mixing(rng: random.Random, mode: str, bound: float = 2.0) -> Tuple[float, float, float, float]:
    while True:
        k1, k2, k3, k4 = (rng.uniform(-bound, bound) for _ in range(4))
        if mode == "nonzero":
            k2 = 0.0
        if abs(k1 * k4 - k2 * k3) > 0.1:
            return k1, k2, k3, k4


def flow_constancy(L: LieAlgebra, phi, pair, trials: int = 200, seed: int = 0, mode: str = "zero",
                   bound: float = 2.0, max_retries: int = 1000) -> float:
    """Max |phi(k1 Ad w1 + k2 Ad w2, k3 Ad w1 + k4 Ad w2) - phi(w1, w2)| over random g and mixings.

    Group parameters and mixing entries are uniform in [-bound, bound];
    k2 = 0 in the nonzero mode. Draws that land near a pole are redrawn.
    """
    mode = normalise_mode(mode)
    phi = RationalFunction.coerce(phi)
    rng = random.Random(seed)
    flows = _Flows(L)
    n = L.dim
    a = np.array([np.longdouble(Fraction(x).numerator) / Fraction(x).denominator for x in pair.a])
    b = np.array([np.longdouble(Fraction(x).numerator) / Fraction(x).denominator for x in pair.b])
    try:
        base = phi.eval_ld(_values(n, a, b))
    except ZeroDivisionError:
        raise PoleError("phi has a pole at the given pair") from None
    worst = 0.0
    done = 0
    retries = 0
    while done < trials:
        eps = [rng.uniform(-bound, bound) for _ in range(n)]
        k1, k2, k3, k4 = random_mixing(rng, mode, bound)
        A = flows.general(eps)
        ga, gb = a @ A, b @ A
        na = k1 * ga + k2 * gb
        nb = k3 * ga + k4 * gb
        if abs(float(poly_eval_ld(phi.den, _values(n, na, nb)))) < 1e-12:
            retries += 1
            if retries > max_retries:
                raise PoleError("too many draws hit a pole of phi")
            continue
        val = phi.eval_ld(_values(n, na, nb))
        worst = max(worst, float(abs(val - base)))
        done += 1
    return worst


# -- semi-invariants -------------------------------------------------------------------

@dataclass(frozen=True)
class SemiInvariant:
    poly: ExpPoly
    weights: Tuple[Tuple[str, Fraction], ...]

    def weight(self, label: str) -> Fraction:
        return dict(self.weights).get(label, Fraction(0))

    def weight_vector(self, labels: Sequence[str]) -> List[Fraction]:
        return [self.weight(lbl) for lbl in labels]

    def to_json(self) -> dict:
        return {"poly": str(self.poly), "weights": {k: str(w) for k, w in self.weights}}


def _monomials(variables: Sequence[str], degree: int) -> List[ExpPoly]:
    out = []
    for combo in itertools.combinations_with_replacement(variables, degree):
        p = ExpPoly.const(1)
        for v in combo:
            p = p * ExpPoly.var(v)
        out.append(p)
    return out


def _poly_field(components: Dict[str, RationalFunction]) -> Tuple[Dict[str, ExpPoly], ExpPoly]:
    """Write the field as (1/D) * sum N_m d/dx_m with polynomial N_m and D.

    D is the product of the distinct denominators; a common factor that
    is not strictly needed only rescales both sides of X(P) = w*P.
    """
    dens: List[ExpPoly] = []
    for c in components.values():
        if not c.is_zero() and not c.den.is_constant() and c.den not in dens:
            dens.append(c.den)
    D = ExpPoly.const(1)
    for d in dens:
        D = D * d
    out = {}
    for name, c in components.items():
        if c.is_zero():
            continue
        cof = ExpPoly.const(1)
        for d in dens:
            if d != c.den:
                cof = cof * d
        if c.den.is_constant():
            cof = D.scale(1 / c.den.constant_value())
        out[name] = c.num * cof
    return out, D


def _coeff_matrix(polys: Sequence[ExpPoly]) -> Tuple[linalg.Matrix, List]:
    keys = sorted({k for p in polys for k, _ in p.items()}, key=repr)
    index = {k: i for i, k in enumerate(keys)}
    M = linalg.zeros(len(keys), len(polys))
    for j, p in enumerate(polys):
        for k, c in p.items():
            M[index[k]][j] = c
    return M, keys


def _candidate_weights(M1S: linalg.Matrix, M2S: linalg.Matrix) -> List[Fraction]:
    """Rational w that may make (M1 - w M2) S singular; verified exactly by the caller."""
    k = len(M1S[0]) if M1S else 0
    if k == 0:
        return []
    # rows where M2S has full column rank give a square pencil
    _, piv = linalg.rref(linalg.transpose(M2S))
    rows = piv[:k]
    if len(rows) < k:
        raise ArithmeticError("multiplier matrix lost rank")
    B = [M2S[r] for r in rows]
    A = [M1S[r] for r in rows]
    T = linalg.matmul(linalg.inverse(B), A)
    if linalg.is_zero(T):
        return [Fraction(0)]
    Tf = np.array([[float(x) for x in row] for row in T])
    eig = np.linalg.eigvals(Tf)
    cands = set()
    for ev in eig:
        if abs(ev.imag) > 0.05 * max(1.0, abs(ev.real)):
            continue
        for q in (1, 2, 3, 4, 6):
            r = Fraction(round(ev.real * q), q)
            if abs(float(r) - ev.real) < 0.05:
                cands.add(r)
                break
    return sorted(cands)


def _intersect(basis: linalg.Matrix, M: linalg.Matrix) -> linalg.Matrix:
    """Columns of ``basis`` (as a matrix, columns = vectors) spanning {x in span : M x = 0}."""
    k = len(basis[0])
    MS = linalg.matmul(M, basis)
    null = linalg.nullspace(MS, k)
    if not null:
        return []
    return linalg.matmul(basis, linalg.transpose(null))


def discover_semi_invariants(L: LieAlgebra, mode: str, degree: int = 2,
                             constraint: Constraint | None = None) -> List[SemiInvariant]:
    """Polynomials P of degree <= d with X(P) = w_X * P for every field X of the system.

    With a constraint, P lives in the constraint's free variables and the
    fields are restricted to the constraint set first. The result lists the
    constant 1 followed by, per degree, a basis of each joint weight space
    modulo products of lower-degree semi-invariants.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    mode = normalise_mode(mode)
    fields = invariant_pde_system(L, mode)
    n = L.dim
    if constraint is None:
        variables = coefficient_names(n)
        comps = [(f.label, {nm: RationalFunction.make(c) for nm, c in zip(coefficient_names(n), f.coeffs)})
                 for f in fields]
    else:
        variables = constraint.free_variables(n)
        comps = [(f.label, restrict_field(f, constraint)) for f in fields]
    poly_fields = []
    for label, c in comps:
        N, D = _poly_field(c)
        if N:
            poly_fields.append((label, N, D))
    labels = [lbl for lbl, _, _ in poly_fields]
    found: List[SemiInvariant] = [SemiInvariant(ExpPoly.const(1), tuple((lbl, Fraction(0)) for lbl in labels))]

    def apply(N, p):
        out = ExpPoly()
        for name, c in N.items():
            d = p.diff(name)
            if d:
                out = out + c * d
        return out

    for e in range(1, degree + 1):
        monos = _monomials(variables, e)
        spaces = [(linalg.identity(len(monos)), {})]
        # fields with a single candidate weight first: they shrink the space cheaply
        for label, N, D in poly_fields:
            img1 = [apply(N, m) for m in monos]
            img2 = [D * m for m in monos]
            M, keys = _coeff_matrix(img1 + img2)
            M1 = [row[: len(monos)] for row in M]
            M2 = [row[len(monos):] for row in M]
            new_spaces = []
            for S, weights in spaces:
                M1S = linalg.matmul(M1, S)
                M2S = linalg.matmul(M2, S)
                for w in _candidate_weights(M1S, M2S):
                    pencil = linalg.sub(M1, linalg.scale(M2, w))
                    S2 = _intersect(S, pencil)
                    if S2:
                        new_spaces.append((S2, {**weights, label: w}))
            spaces = new_spaces
            if not spaces:
                break
        # products of lower-degree semi-invariants with matching weights are not new
        for S, weights in spaces:
            wvec = tuple((lbl, weights.get(lbl, Fraction(0))) for lbl in labels)
            products = _products_of_degree(found, e, labels, wvec)
            vecs = [[S[i][j] for i in range(len(S))] for j in range(len(S[0]))]
            coeff_of = _coeffs_in(monos)
            known = [coeff_of(p) for p in products]
            known = [v for v in known if v is not None]
            basis = _complement(known, vecs)
            for v in basis:
                poly = sum((m.scale(c) for m, c in zip(monos, v) if c), ExpPoly())
                poly = _primitive(poly)
                found.append(SemiInvariant(poly, wvec))
    return found


def _coeffs_in(monos: Sequence[ExpPoly]):
    index = {next(iter(m.terms)): i for i, m in enumerate(monos)}

    def coeffs(p: ExpPoly):
        v = [Fraction(0)] * len(monos)
        for k, c in p.items():
            if k not in index:
                return None
            v[index[k]] = c
        return v
    return coeffs


def _complement(known: List[List[Fraction]], vecs: List[List[Fraction]]) -> List[List[Fraction]]:
    """Vectors from ``vecs`` extending span(known) to span(known + vecs)."""
    out = []
    current = [list(v) for v in known]
    r = linalg.rank(current) if current else 0
    for v in vecs:
        trial = current + [v]
        r2 = linalg.rank(trial)
        if r2 > r:
            out.append(v)
            current = trial
            r = r2
    return out


def _products_of_degree(found: List[SemiInvariant], e: int, labels, wvec) -> List[ExpPoly]:
    """All products of earlier (nonconstant) semi-invariants with total degree e and weight wvec."""
    items = [s for s in found if not s.poly.is_constant()]
    target = [w for _, w in wvec]
    out = []

    def rec(start, deg_left, poly, weight):
        if deg_left == 0:
            if weight == target:
                out.append(poly)
            return
        for i in range(start, len(items)):
            s = items[i]
            d = s.poly.degree()
            if d <= deg_left:
                rec(i, deg_left - d, poly * s.poly,
                    [x + y for x, y in zip(weight, s.weight_vector(labels))])

    rec(0, e, ExpPoly.const(1), [Fraction(0)] * len(labels))
    return [p for p in out if p.degree() == e]


def _primitive(p: ExpPoly) -> ExpPoly:
    g = _content(p)
    lead = p.sorted_terms()[0][1]
    if lead < 0:
        g = -g
    return p.scale(1 / g)


def assemble_rational_invariants(semis: Sequence[SemiInvariant]) -> List[RationalFunction]:
    """Weight-free products prod P_i^{n_i} of the given semi-invariants.

    The integer exponent vectors span the kernel of the weight matrix; the
    basis taken is the reduced-echelon one, so each invariant carries a
    later (higher-degree) semi-invariant to the first power in its
    numerator. A nonconstant semi-invariant of weight zero comes out as
    itself. Results are deduplicated up to rational scalars and inversion.
    """
    labels = sorted({lbl for s in semis for lbl, _ in s.weights})
    items = [s for s in semis if not s.poly.is_constant()]
    if not items:
        return []
    W = [[s.weight(lbl) for s in items] for lbl in labels]
    out: List[RationalFunction] = []
    for vec in linalg.nullspace(W, len(items)):
        den = 1
        for x in vec:
            den = den * x.denominator // math.gcd(den, x.denominator)
        ints = [int(x * den) for x in vec]
        g = 0
        for x in ints:
            g = math.gcd(g, abs(x))
        ints = [x // g for x in ints]
        num, dnm = ExpPoly.const(1), ExpPoly.const(1)
        for s, k in zip(items, ints):
            if k > 0:
                num = num * s.poly ** k
            elif k < 0:
                dnm = dnm * s.poly ** (-k)
        f = RationalFunction.make(num, dnm)
        if f.is_constant():
            continue
        if any(f.proportional_to(g) is not None or (1 / f).proportional_to(g) is not None for g in out):
            continue
        out.append(f)
    return out
