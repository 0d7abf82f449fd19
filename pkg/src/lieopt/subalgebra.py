"""Two-dimensional subalgebras {w1, w2} with [w1, w2] = lambda*w1.

A pair is stored as coefficient vectors ``a`` (for w1) and ``b`` (for w2).
The symbols of the determined equations are ``a1..an``, ``b1..bn`` and
``lam``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import linalg
from .algebra import LieAlgebra, bracket
from .exppoly import ExpPoly, ParseError
from .expr import RationalFunction, coefficient_names, parse_rational_function


class DegeneratePair(ValueError):
    """w1 and w2 are linearly dependent."""


class ConstraintError(ValueError):
    """A constraint could not be parsed or satisfied."""


@dataclass(frozen=True)
class AlgebraPair:
    a: Tuple[Fraction, ...]
    b: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(Fraction(x) for x in self.a))
        object.__setattr__(self, "b", tuple(Fraction(x) for x in self.b))
        if len(self.a) != len(self.b):
            raise ValueError("w1 and w2 must have the same length")
        if linalg.rank([list(self.a), list(self.b)]) < 2:
            raise DegeneratePair(f"w1={list(map(str, self.a))} and w2={list(map(str, self.b))} are dependent")

    @property
    def dim(self) -> int:
        return len(self.a)

    def values(self) -> Dict[str, Fraction]:
        names = coefficient_names(self.dim)
        return dict(zip(names, self.a + self.b))

    def as_floats(self) -> np.ndarray:
        return np.array([float(x) for x in self.a + self.b])

    @staticmethod
    def from_values(n: int, values: Dict[str, Fraction]) -> "AlgebraPair":
        return AlgebraPair(tuple(values[f"a{i}"] for i in range(1, n + 1)),
                           tuple(values[f"b{i}"] for i in range(1, n + 1)))

    def to_json(self) -> dict:
        return {"a": [str(x) for x in self.a], "b": [str(x) for x in self.b]}

    @staticmethod
    def from_json(doc) -> "AlgebraPair":
        return AlgebraPair(tuple(Fraction(x) for x in doc["a"]), tuple(Fraction(x) for x in doc["b"]))


def pair_from_elements(L: LieAlgebra, w1: str, w2: str) -> AlgebraPair:
    """Build a pair from text such as ``"v6"`` and ``"v4 - 1/2*v3"``."""
    return AlgebraPair(tuple(L.element(w1)), tuple(L.element(w2)))


@dataclass(frozen=True)
class PairClass:
    tag: str  # "NormalizerForm" | "GeneralClosed" | "NotClosed"
    lam: Optional[Fraction] = None
    mu: Optional[Fraction] = None

    def __str__(self):
        if self.tag == "NormalizerForm":
            return f"NormalizerForm(lambda={self.lam})"
        if self.tag == "GeneralClosed":
            return f"GeneralClosed(lambda={self.lam}, mu={self.mu})"
        return "NotClosed"


@dataclass(frozen=True)
class PolynomialSystem:
    """Equations ``lhs = 0`` in the symbols a_i, b_i and lam."""

    equations: Tuple[ExpPoly, ...]
    symbols: Tuple[str, ...]

    def lines(self) -> List[str]:
        return [f"{eq} = 0" for eq in self.equations]

    def evaluate(self, values: Dict[str, Fraction]) -> List[Fraction]:
        from .expr import poly_eval_exact
        return [poly_eval_exact(eq, values) for eq in self.equations]


def determined_equations(L: LieAlgebra) -> PolynomialSystem:
    """sum_{i,j} a_i b_j C_ij^k - lam*a_k = 0 for each k with a nonzero left side."""
    n = L.dim
    a = [ExpPoly.var(f"a{i + 1}") for i in range(n)]
    b = [ExpPoly.var(f"b{i + 1}") for i in range(n)]
    lam = ExpPoly.var("lam")
    br = bracket(L, a, b)
    eqs = []
    for k in range(n):
        eq = br[k] - lam * a[k]
        if not eq.is_zero():
            eqs.append(eq)
    return PolynomialSystem(tuple(eqs), tuple(coefficient_names(n)) + ("lam",))


def classify_pair(L: LieAlgebra, p: AlgebraPair) -> PairClass:
    if p.dim != L.dim:
        raise ValueError(f"pair has length {p.dim}, algebra has dimension {L.dim}")
    c = bracket(L, list(p.a), list(p.b))
    M = [[p.a[k], p.b[k]] for k in range(L.dim)]
    sol = linalg.solve(M, c)
    if sol is None:
        return PairClass("NotClosed")
    lam, mu = sol
    if mu == 0:
        return PairClass("NormalizerForm", lam=lam)
    return PairClass("GeneralClosed", lam=lam, mu=mu)


def classify_numeric(L: LieAlgebra, a: np.ndarray, b: np.ndarray) -> Tuple[float, float, float]:
    """Least-squares (lambda, mu) with [w1, w2] ~ lambda*w1 + mu*w2 and the residual norm."""
    c = np.asarray(bracket(L, [float(x) for x in a], [float(x) for x in b]), dtype=float)
    M = np.column_stack([a, b])
    sol, *_ = np.linalg.lstsq(M, c, rcond=None)
    res = float(np.linalg.norm(M @ sol - c))
    return float(sol[0]), float(sol[1]), res


# -- constraints ------------------------------------------------------------

SIGNS = {"positive": 1, "negative": -1, "nonzero": 0, "+": 1, "-": -1, "!=0": 0}


@dataclass(frozen=True)
class Constraint:
    """Parametrised case: sequential substitutions plus sign conditions.

    Substitution expressions may reference free variables and symbols
    substituted earlier in the list. ``lam`` (optional) is the case's
    lambda as a function of the coefficients.
    """

    name: str
    subs: Tuple[Tuple[str, RationalFunction], ...] = ()
    conditions: Tuple[Tuple[RationalFunction, int], ...] = ()
    lam: Optional[RationalFunction] = None

    def free_variables(self, n: int) -> List[str]:
        fixed = {s for s, _ in self.subs}
        return [v for v in coefficient_names(n) if v not in fixed]

    def complete(self, free: Dict[str, Fraction]) -> Dict[str, Fraction]:
        values = dict(free)
        for sym, expr in self.subs:
            values[sym] = expr.eval_exact(values)
        return values

    def complete_float(self, free: Dict[str, float]) -> Dict[str, float]:
        values = dict(free)
        for sym, expr in self.subs:
            values[sym] = expr.eval_float(values)
        return values

    def satisfied(self, values: Dict[str, Fraction]) -> bool:
        for expr, sign in self.conditions:
            v = expr.eval_exact(values)
            if sign == 0 and v == 0:
                return False
            if sign > 0 and v <= 0:
                return False
            if sign < 0 and v >= 0:
                return False
        return True

    def substitute(self, f: RationalFunction) -> RationalFunction:
        """Express f in the free variables only."""
        out = f
        for sym, expr in reversed(self.subs):
            out = out.subs({sym: expr})
        return out

    def to_json(self) -> dict:
        doc = {"subs": [{"sym": s, "expr": str(e)} for s, e in self.subs]}
        if self.conditions:
            inv = {1: "positive", -1: "negative", 0: "nonzero"}
            doc["conditions"] = [{"expr": str(e), "sign": inv[s]} for e, s in self.conditions]
        if self.lam is not None:
            doc["lambda"] = str(self.lam)
        return doc


def parse_constraint(doc, n: int, name: str = "user") -> Constraint:
    """Accept ``[{"sym","expr"}, ...]`` or ``{"subs": [...], "conditions": [...], "lambda": ...}``."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConstraintError(f"invalid JSON: {exc}") from None
    if isinstance(doc, list):
        doc = {"subs": doc}
    if not isinstance(doc, dict):
        raise ConstraintError("constraint must be a list of substitutions or an object")
    names = coefficient_names(n)
    subs = []
    seen = set()
    try:
        for entry in doc.get("subs", []):
            sym = entry["sym"]
            if sym not in names:
                raise ConstraintError(f"unknown symbol {sym!r}")
            if sym in seen:
                raise ConstraintError(f"{sym} substituted twice")
            seen.add(sym)
            subs.append((sym, parse_rational_function(str(entry["expr"]), names)))
        conds = []
        for entry in doc.get("conditions", []):
            sign = SIGNS.get(str(entry.get("sign", "nonzero")))
            if sign is None:
                raise ConstraintError(f"unknown sign {entry.get('sign')!r}")
            conds.append((parse_rational_function(str(entry["expr"]), names), sign))
        lam = doc.get("lambda")
        lam = parse_rational_function(str(lam), names) if lam is not None else None
    except (KeyError, TypeError) as exc:
        raise ConstraintError(f"malformed constraint entry: {exc}") from None
    except ParseError as exc:
        raise ConstraintError(str(exc)) from None
    # each substitution may only use free symbols or earlier substitutions
    later = [s for s, _ in subs]
    for idx, (sym, expr) in enumerate(subs):
        bad = expr.variables() & set(later[idx:])
        if bad:
            raise ConstraintError(f"{sym} refers to {sorted(bad)} before they are defined")
    return Constraint(name=name, subs=tuple(subs), conditions=tuple(conds), lam=lam)


SAMPLE_NUMERATORS = [k for k in range(-9, 10) if k]
SAMPLE_DENOMINATORS = [1, 2, 3, 4]


def draw_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.choice(SAMPLE_NUMERATORS), rng.choice(SAMPLE_DENOMINATORS))


@dataclass
class Sample:
    pair: AlgebraPair
    values: Dict[str, Fraction]
    lam: Fraction


def sample_constrained_pairs(L: LieAlgebra, constraint: Constraint | None, count: int, seed: int,
                             max_tries: int = 200) -> List[Sample]:
    """Deterministic exact samples satisfying the constraint and [w1, w2] = lam*w1.

    Raises ConstraintError when ``max_tries`` draws per requested sample fail.
    """
    constraint = constraint or Constraint("free")
    rng = random.Random(seed)
    free = constraint.free_variables(L.dim)
    system = determined_equations(L)
    out: List[Sample] = []
    budget = max_tries * max(count, 1)
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > budget:
            raise ConstraintError(
                f"constraint {constraint.name!r}: only {len(out)} of {count} samples found in {budget} draws")
        draw = {v: draw_rational(rng) for v in free}
        try:
            values = constraint.complete(draw)
            if not constraint.satisfied(values):
                continue
            pair = AlgebraPair.from_values(L.dim, values)
        except (ZeroDivisionError, DegeneratePair):
            continue
        cls = classify_pair(L, pair)
        if cls.tag != "NormalizerForm":
            if constraint.subs:
                raise ConstraintError(f"constraint {constraint.name!r} produced a pair outside normalizer form: {cls}")
            continue
        if constraint.lam is not None and constraint.lam.eval_exact(values) != cls.lam:
            raise ConstraintError(f"constraint {constraint.name!r}: lambda mismatch")
        residual = system.evaluate({**values, "lam": cls.lam})
        if any(residual):
            raise ConstraintError("determined equations do not vanish on the sample")
        out.append(Sample(pair, values, cls.lam))
    return out
