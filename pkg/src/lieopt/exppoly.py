"""Exact arithmetic on exp-polynomials.

An exp-polynomial is a finite sum of terms ``c * prod(x_i^p_i) * prod(exp(q_j x_j))``
with rational ``c``, nonnegative integer ``p_i`` and integer ``q_j``. Plain
multivariate polynomials are the special case without exponential factors,
so the same class carries polynomials in the subalgebra coefficients too.

Terms are stored in a dict keyed by ``(monomial, exponential)`` where both
parts are sorted tuples of ``(variable, exponent)``. Zero coefficients are
never stored, which makes equality of canonical forms syntactic.
"""

from __future__ import annotations

import ast
import math
import re
from fractions import Fraction
from typing import Callable, Dict, Iterator, Mapping, Sequence, Tuple

import numpy as np

Monomial = Tuple[Tuple[str, int], ...]
TermKey = Tuple[Monomial, Monomial]

_NAME_RE = re.compile(r"^([A-Za-z_]*?)(\d*)$")


def var_key(name: str):
    """Natural sort key: ``eps2`` < ``eps10``, ``a6`` < ``b1``."""
    m = _NAME_RE.match(name)
    if m is None:
        return (name, -1, name)
    prefix, digits = m.groups()
    return (prefix, int(digits) if digits else -1, name)


def _merge(a: Monomial, b: Monomial, drop_zero: bool = True) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for v, p in b:
        acc[v] = acc.get(v, 0) + p
    return tuple(sorted(((v, p) for v, p in acc.items() if p != 0 or not drop_zero),
                        key=lambda vp: var_key(vp[0])))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        raise TypeError("floats are not exact; pass a Fraction or an int")
    return Fraction(c)


class ExpPoly:
    """Immutable exp-polynomial in canonical form."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[TermKey, Fraction] | None = None):
        clean: Dict[TermKey, Fraction] = {}
        if terms:
            for key, c in terms.items():
                c = _as_fraction(c)
                if c != 0:
                    clean[key] = clean.get(key, Fraction(0)) + c
            clean = {k: c for k, c in clean.items() if c != 0}
        self._terms = clean
        self._hash = None

    # -- construction -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "ExpPoly":
        return cls({((), ()): _as_fraction(c)})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "ExpPoly":
        if power < 0:
            raise ValueError("negative powers are not allowed")
        if power == 0:
            return cls.const(1)
        return cls({(((name, power),), ()): Fraction(1)})

    @classmethod
    def exp(cls, name: str, q: int = 1) -> "ExpPoly":
        """``exp(q * name)`` for integer ``q``."""
        if int(q) != q:
            raise ValueError(f"exp-power must be an integer, got {q}")
        q = int(q)
        if q == 0:
            return cls.const(1)
        return cls({((), ((name, q),)): Fraction(1)})

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls()

    @staticmethod
    def coerce(x) -> "ExpPoly":
        if isinstance(x, ExpPoly):
            return x
        return ExpPoly.const(x)

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> Dict[TermKey, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[TermKey, Fraction]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(key == ((), ()) for key in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get(((), ()), Fraction(0))

    def is_polynomial(self) -> bool:
        return all(not expo for (_, expo) in self._terms)

    def variables(self) -> set:
        out = set()
        for mono, expo in self._terms:
            out.update(v for v, _ in mono)
            out.update(v for v, _ in expo)
        return out

    def degree(self) -> int:
        return max((sum(p for _, p in mono) for mono, _ in self._terms), default=0)

    def degree_in(self, name: str) -> int:
        return max((dict(mono).get(name, 0) for mono, _ in self._terms), default=0)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other) -> "ExpPoly":
        other = ExpPoly.coerce(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, Fraction(0)) + c
        return ExpPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "ExpPoly":
        return ExpPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other) -> "ExpPoly":
        return self + (-ExpPoly.coerce(other))

    def __rsub__(self, other) -> "ExpPoly":
        return ExpPoly.coerce(other) - self

    def __mul__(self, other) -> "ExpPoly":
        other = ExpPoly.coerce(other)
        acc: Dict[TermKey, Fraction] = {}
        for (m1, e1), c1 in self._terms.items():
            for (m2, e2), c2 in other._terms.items():
                key = (_merge(m1, m2), _merge(e1, e2))
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return ExpPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "ExpPoly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = ExpPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> "ExpPoly":
        c = _as_fraction(c)
        return ExpPoly({k: v * c for k, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ExpPoly.const(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus and substitution -----------------------------------------
    def diff(self, name: str) -> "ExpPoly":
        acc: Dict[TermKey, Fraction] = {}
        for (mono, expo), c in self._terms.items():
            md = dict(mono)
            p = md.get(name, 0)
            q = dict(expo).get(name, 0)
            if p:
                md2 = dict(md)
                md2[name] = p - 1
                m2 = tuple(sorted(((v, e) for v, e in md2.items() if e), key=lambda t: var_key(t[0])))
                key = (m2, expo)
                acc[key] = acc.get(key, Fraction(0)) + c * p
            if q:
                key = (mono, expo)
                acc[key] = acc.get(key, Fraction(0)) + c * q
        return ExpPoly(acc)

    def rename(self, mapping: Mapping[str, str]) -> "ExpPoly":
        acc: Dict[TermKey, Fraction] = {}
        for (mono, expo), c in self._terms.items():
            m2: Monomial = ()
            for v, p in mono:
                m2 = _merge(m2, ((mapping.get(v, v), p),))
            e2: Monomial = ()
            for v, q in expo:
                e2 = _merge(e2, ((mapping.get(v, v), q),))
            key = (m2, e2)
            acc[key] = acc.get(key, Fraction(0)) + c
        return ExpPoly(acc)

    def subs(self, values: Mapping[str, "ExpPoly | Fraction | int"]) -> "ExpPoly":
        """Substitute polynomial variables.

        A variable that also appears inside ``exp`` may only be set to zero.
        """
        vals = {k: ExpPoly.coerce(v) for k, v in values.items()}
        out = ExpPoly()
        cache: Dict[Tuple[str, int], ExpPoly] = {}
        for (mono, expo), c in self._terms.items():
            term = ExpPoly.const(c)
            keep_e = []
            for v, q in expo:
                if v in vals:
                    if not vals[v].is_zero():
                        raise ValueError(f"cannot substitute nonzero value into exp({v})")
                else:
                    keep_e.append((v, q))
            keep_m = []
            for v, p in mono:
                if v in vals:
                    if (v, p) not in cache:
                        cache[(v, p)] = vals[v] ** p
                    term = term * cache[(v, p)]
                else:
                    keep_m.append((v, p))
            term = term * ExpPoly({(tuple(keep_m), tuple(keep_e)): Fraction(1)})
            out = out + term
        return out

    def coefficient(self, name: str, power: int = 1) -> "ExpPoly":
        """Collect the terms carrying exactly ``name^power`` and strip that factor."""
        acc: Dict[TermKey, Fraction] = {}
        for (mono, expo), c in self._terms.items():
            md = dict(mono)
            if md.get(name, 0) != power:
                continue
            md.pop(name, None)
            m2 = tuple(sorted(md.items(), key=lambda t: var_key(t[0])))
            acc[(m2, expo)] = acc.get((m2, expo), Fraction(0)) + c
        return ExpPoly(acc)

    # -- numerics -----------------------------------------------------------
    def evaluate(self, at: Mapping[str, float]) -> float:
        missing = self.variables() - set(at)
        if missing:
            raise KeyError(f"unbound variable(s): {', '.join(sorted(missing, key=var_key))}")
        vals = []
        const = 0.0
        for (mono, expo), c in self._terms.items():
            if not mono and not expo:
                const = float(c)
                continue
            t = float(c)
            for v, p in mono:
                t *= float(at[v]) ** p
            if expo:
                t *= math.exp(sum(q * float(at[v]) for v, q in expo))
            vals.append(t)
        return math.fsum(vals) + const

    # -- printing -----------------------------------------------------------
    def sorted_terms(self):
        def key(item):
            (mono, expo), _ = item
            deg = sum(p for _, p in mono)
            eabs = sum(abs(q) for _, q in expo)
            return (-deg, -eabs,
                    tuple((var_key(v), -p) for v, p in mono),
                    tuple((var_key(v), -q) for v, q in expo))
        return sorted(self._terms.items(), key=key)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (mono, expo), c in self.sorted_terms():
            factors = [v if p == 1 else f"{v}^{p}" for v, p in mono]
            for v, q in expo:
                factors.append(f"exp({v})" if q == 1 else f"exp(-{v})" if q == -1 else f"exp({q}*{v})")
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = f"{mag}*" + "*".join(factors)
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self) -> str:
        return f"ExpPoly({str(self)!r})"


def ep_mul(p: ExpPoly, q: ExpPoly) -> ExpPoly:
    return p * q


def ep_eval(p: ExpPoly, at: Mapping[str, float]) -> float:
    return p.evaluate(at)


def ep_equal(p: ExpPoly, q: ExpPoly) -> bool:
    return p == q


# -- parsing ----------------------------------------------------------------

class ParseError(ValueError):
    pass


def _literal(node) -> Fraction:
    if isinstance(node.value, bool) or not isinstance(node.value, int):
        raise ParseError(f"only integer literals are allowed, got {node.value!r}")
    return Fraction(node.value)


class _Builder:
    """Evaluates a restricted Python AST into some algebraic type."""

    def const(self, c: Fraction):
        raise NotImplementedError

    def var(self, name: str):
        raise NotImplementedError

    def div(self, a, b):
        raise NotImplementedError

    def exp(self, arg: ExpPoly):
        raise ParseError("exp(...) is not allowed here")

    def power(self, a, k: int):
        if k < 0:
            raise ParseError("negative powers are not allowed here")
        return a ** k

    def build(self, text: str):
        src = text.replace("^", "**").strip()
        if not src:
            raise ParseError("empty expression")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
        return self._walk(tree.body)

    def _walk(self, node):
        if isinstance(node, ast.Constant):
            return self.const(_literal(node))
        if isinstance(node, ast.Name):
            return self.var(node.id)
        if isinstance(node, ast.UnaryOp):
            val = self._walk(node.operand)
            if isinstance(node.op, ast.USub):
                return -val
            if isinstance(node.op, ast.UAdd):
                return val
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                k = node.right
                sign = 1
                if isinstance(k, ast.UnaryOp) and isinstance(k.op, ast.USub):
                    sign, k = -1, k.operand
                if not isinstance(k, ast.Constant):
                    raise ParseError("exponents must be integer literals")
                return self.power(self._walk(node.left), sign * int(_literal(k)))
            left, right = self._walk(node.left), self._walk(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return self.div(left, right)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "exp":
            if len(node.args) != 1 or node.keywords:
                raise ParseError("exp takes exactly one argument")
            arg = _ExpPolyBuilder()._walk(node.args[0])
            return self.exp(arg)
        raise ParseError(f"unsupported syntax: {ast.dump(node)}")


class _ExpPolyBuilder(_Builder):
    def const(self, c):
        return ExpPoly.const(c)

    def var(self, name):
        return ExpPoly.var(name)

    def div(self, a, b):
        if not b.is_constant() or b.is_zero():
            raise ParseError("exp-polynomials only allow division by nonzero constants")
        return a.scale(1 / b.constant_value())

    def exp(self, arg: ExpPoly):
        out = ExpPoly.const(1)
        for (mono, expo), c in arg.items():
            if expo or len(mono) != 1 or mono[0][1] != 1:
                raise ParseError(f"exp argument must be an integer-linear form, got {arg}")
            if c.denominator != 1:
                raise ParseError(f"non-integer exp-power {c} is not supported")
            out = out * ExpPoly.exp(mono[0][0], int(c))
        return out

    def power(self, a, k):
        if k < 0:
            # exp(x)^-1 is fine; anything else is outside the ring
            if len(a) == 1:
                (mono, expo), c = next(a.items())
                if not mono and c in (1, -1):
                    return ExpPoly({((), tuple((v, q * k) for v, q in expo)): c ** abs(k)})
            raise ParseError("negative powers are only allowed on single exponentials")
        return a ** k


def parse_exppoly(text: str) -> ExpPoly:
    """Parse text such as ``-(eps5^2+2*eps6)*exp(2*eps4)``."""
    return _ExpPolyBuilder().build(text)


# -- numeric compilation ----------------------------------------------------

def compile_exppolys(polys: Sequence[ExpPoly], variables: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
    """Compile a flat list of exp-polynomials into ``f(x) -> ndarray``.

    ``x[i]`` binds ``variables[i]``. The generated code precomputes each
    distinct ``exp(q*x_i)`` once per call.
    """
    index = {v: i for i, v in enumerate(variables)}
    exps: Dict[Tuple[str, int], str] = {}
    lines = ["def _f(x):"]
    bodies = []
    for p in polys:
        missing = p.variables() - set(index)
        if missing:
            raise KeyError(f"unbound variable(s): {sorted(missing)}")
        terms = []
        for (mono, expo), c in p.sorted_terms():
            factors = [repr(float(c))]
            for v, pw in mono:
                factors.append(f"x[{index[v]}]" if pw == 1 else f"x[{index[v]}]**{pw}")
            for v, q in expo:
                name = exps.setdefault((v, q), f"_e{len(exps)}")
                factors.append(name)
            terms.append("*".join(factors))
        bodies.append(" + ".join(terms) if terms else "0.0")
    for (v, q), name in exps.items():
        lines.append(f"    {name} = _exp({q}*x[{index[v]}])")
    lines.append("    return _array([" + ", ".join(bodies) + "])")
    namespace = {"_exp": math.exp, "_array": np.array}
    exec("\n".join(lines), namespace)  # noqa: S102 - generated from canonical terms only
    return namespace["_f"]


def ep_eval_ld(p: ExpPoly, at: Mapping[str, float]) -> np.longdouble:
    """Evaluate in extended precision (``np.longdouble``); used by the numeric invariance checks."""
    acc = np.longdouble(0)
    for (mono, expo), c in p.items():
        t = np.longdouble(c.numerator) / np.longdouble(c.denominator)
        for v, k in mono:
            t = t * np.longdouble(at[v]) ** k
        if expo:
            t = t * np.exp(sum((np.longdouble(q) * np.longdouble(at[v]) for v, q in expo), np.longdouble(0)))
        acc = acc + t
    return acc
