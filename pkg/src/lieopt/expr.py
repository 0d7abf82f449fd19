"""Rational functions over the pair coefficients a1..an, b1..bn.

These carry case constraints, invariants such as (b1*b4 - b2*b3)/b1^2,
sign classifiers and the symbolic lambda of each case. Numerator and
denominator are plain polynomials (``ExpPoly`` without exponential
factors); no gcd cancellation is attempted beyond constant content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exppoly import ExpPoly, ParseError, _Builder, var_key


def poly_eval_exact(p: ExpPoly, values: Mapping[str, Fraction]) -> Fraction:
    acc = Fraction(0)
    for (mono, expo), c in p.items():
        if expo:
            raise ValueError("exponential terms cannot be evaluated exactly")
        t = c
        for v, k in mono:
            try:
                t *= values[v] ** k
            except KeyError:
                raise KeyError(f"unbound variable {v}") from None
        acc += t
    return acc


def poly_eval_float(p: ExpPoly, values: Mapping[str, float]) -> float:
    vals = []
    for (mono, _), c in p.items():
        t = float(c)
        for v, k in mono:
            t *= float(values[v]) ** k
        vals.append(t)
    return math.fsum(vals)


def poly_eval_ld(p: ExpPoly, values: Mapping[str, float]) -> np.longdouble:
    acc = np.longdouble(0)
    for (mono, _), c in p.items():
        t = np.longdouble(c.numerator) / np.longdouble(c.denominator)
        for v, k in mono:
            t = t * np.longdouble(values[v]) ** k
        acc = acc + t
    return acc


def _content(p: ExpPoly) -> Fraction:
    """Positive rational g such that p/g has coprime integer coefficients."""
    coeffs = [c for _, c in p.items()]
    if not coeffs:
        return Fraction(1)
    num = 0
    den = 1
    for c in coeffs:
        num = math.gcd(num, c.numerator)
        den = den * c.denominator // math.gcd(den, c.denominator)
    return Fraction(num, den)


@dataclass(frozen=True)
class RationalFunction:
    num: ExpPoly
    den: ExpPoly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("denominator is identically zero")
        if not self.num.is_polynomial() or not self.den.is_polynomial():
            raise ValueError("rational functions take polynomial numerator and denominator")

    @staticmethod
    def make(num, den=1) -> "RationalFunction":
        num, den = ExpPoly.coerce(num), ExpPoly.coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("denominator is identically zero")
        if num.is_zero():
            return RationalFunction(ExpPoly(), ExpPoly.const(1))
        if den.is_constant():
            return RationalFunction(num.scale(1 / den.constant_value()), ExpPoly.const(1))
        # normalise: denominator with coprime integer coefficients, leading term positive
        g = _content(den)
        lead = den.sorted_terms()[0][1]
        if lead < 0:
            g = -g
        return RationalFunction(num.scale(1 / g), den.scale(1 / g))

    @staticmethod
    def coerce(x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        return RationalFunction.make(x)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        o = RationalFunction.coerce(other)
        if self.den == o.den:
            return RationalFunction.make(self.num + o.num, self.den)
        return RationalFunction.make(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalFunction.coerce(other))

    def __rsub__(self, other):
        return RationalFunction.coerce(other) - self

    def __mul__(self, other):
        o = RationalFunction.coerce(other)
        return RationalFunction.make(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = RationalFunction.coerce(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction.make(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RationalFunction.coerce(other) / self

    def __pow__(self, k: int):
        if k >= 0:
            return RationalFunction.make(self.num ** k, self.den ** k)
        return RationalFunction.make(self.den ** -k, self.num ** -k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, ExpPoly)):
            other = RationalFunction.coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def __hash__(self):
        # equal functions may have different representations
        return hash(self.num.constant_value() / self.den.constant_value()) if self.is_constant() else 0

    # -- inspection ----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    def proportional_to(self, other: "RationalFunction") -> Fraction | None:
        """Return c with self == c*other, or None."""
        lhs = self.num * other.den
        rhs = other.num * self.den
        if rhs.is_zero():
            return Fraction(0) if lhs.is_zero() else None
        key, c_r = rhs.sorted_terms()[0]
        c_l = lhs.terms.get(key)
        if c_l is None:
            return None
        c = c_l / c_r
        return c if (lhs - rhs.scale(c)).is_zero() else None

    def diff(self, name: str) -> "RationalFunction":
        return RationalFunction.make(self.num.diff(name) * self.den - self.num * self.den.diff(name),
                                     self.den * self.den)

    # -- substitution and evaluation ------------------------------------------
    def subs(self, values: Mapping[str, "RationalFunction | ExpPoly | Fraction | int"]) -> "RationalFunction":
        """Sequential substitution: each entry is applied to the result of the previous ones."""
        out = self
        for name, val in values.items():
            out = out._subs_one(name, RationalFunction.coerce(val))
        return out

    def _subs_one(self, name: str, val: "RationalFunction") -> "RationalFunction":
        if name not in self.variables():
            return self
        d = max(self.num.degree_in(name), self.den.degree_in(name))
        num = _homogenised_subs(self.num, name, val, d)
        den = _homogenised_subs(self.den, name, val, d)
        return RationalFunction.make(num, den)

    def eval_exact(self, values: Mapping[str, Fraction]) -> Fraction:
        d = poly_eval_exact(self.den, values)
        if d == 0:
            raise ZeroDivisionError(f"denominator {self.den} vanishes")
        return poly_eval_exact(self.num, values) / d

    def eval_float(self, values: Mapping[str, float]) -> float:
        d = poly_eval_float(self.den, values)
        if d == 0:
            raise ZeroDivisionError(f"denominator {self.den} vanishes")
        return poly_eval_float(self.num, values) / d

    def eval_ld(self, values: Mapping[str, float]) -> np.longdouble:
        d = poly_eval_ld(self.den, values)
        if d == 0:
            raise ZeroDivisionError(f"denominator {self.den} vanishes")
        return poly_eval_ld(self.num, values) / d

    def __str__(self):
        if self.den == ExpPoly.const(1):
            return str(self.num)
        n = str(self.num)
        if len(self.num) > 1:
            n = f"({n})"
        d = str(self.den)
        if len(self.den) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


def _homogenised_subs(p: ExpPoly, name: str, val: RationalFunction, d: int) -> ExpPoly:
    # p(name = N/D) * D^d, computed without leaving the polynomial ring
    out = ExpPoly()
    npow = [ExpPoly.const(1)]
    dpow = [ExpPoly.const(1)]
    for _ in range(d):
        npow.append(npow[-1] * val.num)
        dpow.append(dpow[-1] * val.den)
    for k in range(d + 1):
        coeff = p.coefficient(name, k)
        if not coeff.is_zero():
            out = out + coeff * npow[k] * dpow[d - k]
    return out


class _RationalBuilder(_Builder):
    def const(self, c):
        return RationalFunction.make(c)

    def var(self, name):
        return RationalFunction.make(ExpPoly.var(name))

    def div(self, a, b):
        if b.is_zero():
            raise ParseError("division by zero")
        return a / b

    def power(self, a, k):
        if k < 0 and a.is_zero():
            raise ParseError("division by zero")
        return a ** k


def parse_rational_function(text: str, allowed: Sequence[str] | None = None) -> RationalFunction:
    """Parse ``a4*a5/(2*a6)`` style text; optionally restrict the variable names."""
    rf = _RationalBuilder().build(text)
    if allowed is not None:
        bad = rf.variables() - set(allowed)
        if bad:
            raise ParseError(f"unknown symbol(s): {', '.join(sorted(bad, key=var_key))}")
    return rf


def coefficient_names(n: int) -> list:
    return [f"a{i + 1}" for i in range(n)] + [f"b{i + 1}" for i in range(n)]
