"""Case parametrisations, representatives and closed-form witnesses.

Each case is a parametrised family of pairs {w1, w2} solving the
determined equations, together with the representative it reduces to and
an explicit group element / mixing that performs the reduction:

    a @ A(eps) = k1*a' + k2*b',    b @ A(eps) = k3*a' + k4*b'.

Witness functions receive float coefficient values keyed ``a1..bn`` and
return ``(eps, k)``; group parameters left unspecified are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from ..expr import RationalFunction, parse_rational_function
from ..subalgebra import Constraint

Witness = Callable[[Dict[str, float]], Tuple[List[float], Tuple[float, float, float, float]]]


def rf(text: str) -> RationalFunction:
    return parse_rational_function(text)


@dataclass(frozen=True)
class CaseSpec:
    algebra: str
    name: str
    mode: str  # "zero" | "nonzero"
    constraint: Constraint
    representative: str  # optimal-system label, e.g. "g1" or "g10"
    witness: Witness
    # rational functions whose sign is constant on the case (separating neighbours)
    classifiers: Tuple[Tuple[str, RationalFunction], ...] = ()
    # rational invariants on the case set; the first one fixes the family parameter
    invariants: Tuple[Tuple[str, RationalFunction], ...] = ()
    # family parameter of the representative as a function of the first invariant
    parameter: Optional[Callable[[Fraction], Fraction]] = None

    def target_parameter(self, values: Dict[str, Fraction]) -> Optional[Fraction]:
        if self.parameter is None:
            return None
        return self.parameter(self.invariants[0][1].eval_exact(values))


def _constraint(name, subs, conditions=(), lam=None) -> Constraint:
    return Constraint(
        name=name,
        subs=tuple((s, rf(e)) for s, e in subs),
        conditions=tuple((rf(e), sign) for e, sign in conditions),
        lam=rf(lam) if lam is not None else rf("0"),
    )


# -- heat6 expressions --------------------------------------------------------

D = "(a5*b6 - b5*a6)"
E = "(a3*b6 - b3*a6)"
F = "(a3*b5 - b3*a5)"
LAMBDA1 = f"2*a6*(a4*{D}^2 - 2*a6*{E}^2 - 2*a6*{D}*{F})"
Q = "4*a2*a6 - a4^2"
# The sign of P splits the (iiic) parametrisation but is not an invariant:
# Ad(exp(eps*v6)) shifts P linearly once a4 != 0, so it is not a classifier.
P = "2*a1*a6 - a4*a5"
DELTA1 = "(2*(b4 + 2*b3)*a6^2 - a5*(a5*b6 - 2*b5*a6))/(a6*(a4*b6 - a6*b4))"
DELTA2 = "(4*a3*(a3*b6 + a5*b5) - 2*a5^2*(b4 + 2*b3))/(a5*(2*a1*b6 - a5*b4))"

HEAT_I_SUBS = [
    ("a1", "a4*a5/(2*a6)"), ("a2", "a4^2/(4*a6)"),
    ("b1", "a4*a5*b6/(2*a6^2)"), ("b2", "a4^2*b6/(4*a6^2)"),
    ("b4", "a4*b6/a6"), ("b5", "a5*b6/a6"),
]
HEAT_II_SUBS = [
    ("a1", "a4*a5/(2*a6)"), ("a2", "a4^2/(4*a6)"),
    ("b1", "a4*b5/(2*a6)"), ("b2", "a4^2*b6/(4*a6^2)"),
    ("b4", "a4*b6/a6"),
]
HEAT_III_SUBS = [
    ("b1", "a1*b6/a6"), ("b2", "a2*b6/a6"), ("b4", "a4*b6/a6"), ("b5", "a5*b6/a6"),
]


def _heat_i(v):
    a3, a4, a5, a6, b3, b6 = (v[k] for k in ("a3", "a4", "a5", "a6", "b3", "b6"))
    eps = [a5 / (2 * a6), a4 / (4 * a6), 0.0, 0.0, 0.0, 0.0]
    k = (a6, (4 * a3 * a6 + 2 * a4 * a6 + a5 ** 2) / (4 * a6),
         b6, (4 * b3 * a6 ** 2 + b6 * a5 ** 2 + 2 * a4 * a6 * b6) / (4 * a6 ** 2))
    return eps, k


def _heat_ii(sign):
    def witness(v):
        a3, a4, a5, a6, b3, b5, b6 = (v[k] for k in ("a3", "a4", "a5", "a6", "b3", "b5", "b6"))
        d = a5 * b6 - b5 * a6
        e = a3 * b6 - b3 * a6
        f = a3 * b5 - b3 * a5
        lam1 = 2 * a6 * (a4 * d * d - 2 * a6 * e * e - 2 * a6 * d * f)
        root = math.sqrt(sign * lam1)
        k1 = sign * lam1 / (4 * a6 * d * d)
        # the w2 component scales with 1/(d*e^{eps4}), so it keeps the sign of d
        k2 = (a5 * d + 2 * a6 * e) / (2 * abs(a6 * d) * d) * root
        k3 = b6 / a6 * k1
        k4 = (b5 * d + 2 * b6 * e) / (2 * abs(a6 * d) * d) * root
        eps = [-e / d, a4 / (4 * a6), 0.0, math.log(2 * abs(a6 * d) / root), 0.0, 0.0]
        return eps, (k1, k2, k3, k4)
    return witness


def _heat_iic(v):
    a3, a5, a6, b3, b5, b6 = (v[k] for k in ("a3", "a5", "a6", "b3", "b5", "b6"))
    d = a5 * b6 - b5 * a6
    e = a3 * b6 - b3 * a6
    f = a3 * b5 - b3 * a5
    eps = [-e / d, (d * f + e * e) / (2 * d * d), 0.0, 0.0, 0.0, 0.0]
    # the mixing coefficient of w2 follows the same pattern as that of w1 with a -> b
    k = (a6, (a5 * d + 2 * a6 * e) / d, b6, (b5 * d + 2 * b6 * e) / d)
    return eps, k


def _heat_iii(sign):
    def witness(v):
        a1, a2, a3, a4, a5, a6, b3, b6 = (v[k] for k in ("a1", "a2", "a3", "a4", "a5", "a6", "b3", "b6"))
        q = 4 * a2 * a6 - a4 * a4
        # any eps2 with R != 0 works; prefer 0
        for e2 in (0.0, 1.0, -1.0, 2.0):
            r = a2 - 2 * a4 * e2 + 4 * a6 * e2 * e2
            if abs(r) > 1e-9:
                break
        x = math.sqrt(sign * q) / (2 * abs(r))  # e^{2 eps4}
        e4 = 0.5 * math.log(x)
        s = (a1 * a1 * a6 - a1 * a4 * a5 + a2 * a5 * a5) / q
        k1 = sign * r * x
        k2 = a3 + a4 / 2 + s
        k3 = sign * b6 * r * x / a6
        k4 = b3 + b6 / a6 * (a4 / 2 + s)
        e1 = (2 * e2 * (2 * a1 * a6 - a4 * a5) + 2 * a2 * a5 - a1 * a4) / q
        e5 = (a4 * a5 - 2 * a1 * a6) / (q * math.exp(e4))
        e6 = (4 * a6 * e2 - a4) / (4 * x * r)
        return [e1, e2, 0.0, e4, e5, e6], (k1, k2, k3, k4)
    return witness


def _heat_iiic(sign):
    def witness(v):
        a1, a3, a4, a5, a6, b3, b6 = (v[k] for k in ("a1", "a3", "a4", "a5", "a6", "b3", "b6"))
        p = 2 * a1 * a6 - a4 * a5
        z = (sign * 2 * a6 * a6 / p) ** (1.0 / 3.0)
        e5 = e6 = 0.0
        t = (e6 * e6 + e5) if sign > 0 else (e5 - e6 * e6)
        k1 = a6 / z ** 2
        k2 = -t * p / (2 * a6) * z + a3 + a4 / 2 + a5 * a5 / (4 * a6)
        k3 = sign * b6 * p / (2 * a6 * a6) * z
        k4 = b6 / (4 * a6 * a6) * (-2 * t * p * z + (a5 * a5 + 2 * a4 * a6)) + b3
        e1 = e6 * p / (2 * a6 * a6) * z * z + a5 / (2 * a6)
        return [e1, a4 / (4 * a6), 0.0, math.log(z), e5, e6], (k1, k2, k3, k4)
    return witness


def _heat_2(v):
    a1, a3, a5, b3, b5 = (v[k] for k in ("a1", "a3", "a5", "b3", "b5"))
    return [0.0, a1 / (2 * a5), 0.0, 0.0, 0.0, 0.0], (a5, a3, b5, b3)


def _heat_3(v):
    a4, a5, a6, b4, b5, b6 = (v[k] for k in ("a4", "a5", "a6", "b4", "b5", "b6"))
    e5 = (a6 * b5 - a5 * b6) / (a4 * b6 - a6 * b4)
    return [a5 / (2 * a6), a4 / (4 * a6), 0.0, 0.0, e5, 0.0], (a6, 0.0, b6, (a6 * b4 - b6 * a4) / a6)


def _heat_4(v):
    a1, a3, a5, b4, b5, b6 = (v[k] for k in ("a1", "a3", "a5", "b4", "b5", "b6"))
    e6 = a5 * b6 / (2 * (2 * a1 * b6 - a5 * b4))
    k3 = (a5 * b5 + 2 * a3 * b6) / a5
    return [-a3 / a5, a1 / (2 * a5), 0.0, 0.0, 0.0, e6], (a5, 0.0, k3, (a5 * b4 - 2 * a1 * b6) / a5)


HEAT_CASES: List[CaseSpec] = [
    CaseSpec("heat6", "i", "zero", _constraint("i", HEAT_I_SUBS), "g1", _heat_i),
    CaseSpec("heat6", "iia", "zero",
             _constraint("iia", HEAT_II_SUBS, [(D, 0), (LAMBDA1, 1)]), "g2", _heat_ii(1),
             classifiers=(("Lambda1", rf(LAMBDA1)),)),
    CaseSpec("heat6", "iib", "zero",
             _constraint("iib", HEAT_II_SUBS, [(D, 0), (LAMBDA1, -1)]), "g3", _heat_ii(-1),
             classifiers=(("Lambda1", rf(LAMBDA1)),)),
    CaseSpec("heat6", "iic", "zero",
             _constraint("iic", [("a4", f"2*a6*({E}^2 + {D}*{F})/{D}^2")] + HEAT_II_SUBS, [(D, 0)]),
             "g4", _heat_iic, classifiers=(("Lambda1", rf(LAMBDA1)),)),
    CaseSpec("heat6", "iiia", "zero",
             _constraint("iiia", HEAT_III_SUBS, [(Q, 1)]), "g5", _heat_iii(1),
             classifiers=(("Q", rf(Q)),)),
    CaseSpec("heat6", "iiib", "zero",
             _constraint("iiib", HEAT_III_SUBS, [(Q, -1)]), "g6", _heat_iii(-1),
             classifiers=(("Q", rf(Q)),)),
    CaseSpec("heat6", "iiic+", "zero",
             _constraint("iiic+", [("a2", "a4^2/(4*a6)")] + HEAT_III_SUBS, [(P, 1)]), "g7", _heat_iiic(1),
             classifiers=(("Q", rf(Q)),)),
    CaseSpec("heat6", "iiic-", "zero",
             _constraint("iiic-", [("a2", "a4^2/(4*a6)")] + HEAT_III_SUBS, [(P, -1)]), "g8", _heat_iiic(-1),
             classifiers=(("Q", rf(Q)),)),
    CaseSpec("heat6", "2", "zero",
             _constraint("2", [("a2", "0"), ("a4", "0"), ("a6", "0"), ("b2", "0"), ("b4", "0"),
                               ("b6", "0"), ("b1", "a1*b5/a5")]), "g9", _heat_2),
    CaseSpec("heat6", "3", "nonzero",
             _constraint("3", [("a1", "a4*a5/(2*a6)"), ("a2", "a4^2/(4*a6)"),
                               ("a3", "-(a5^2 + 2*a4*a6)/(4*a6)"),
                               ("b1", "(a4*a6*b5 - a5*(a4*b6 - b4*a6))/(2*a6^2)"),
                               ("b2", "a4*(2*a6*b4 - a4*b6)/(4*a6^2)")],
                         [("a4*b6 - a6*b4", 0)], lam="2*(a4*b6 - a6*b4)/a6"),
             "g10", _heat_3, invariants=(("Delta1", rf(DELTA1)),),
             parameter=lambda c: Fraction(-1, 2) - c / 4),
    CaseSpec("heat6", "4", "nonzero",
             _constraint("4", [("a2", "0"), ("a4", "0"), ("a6", "0"),
                               ("b1", "(a1*(2*a3*b6 + a5*b5) - a3*a5*b4)/a5^2"),
                               ("b2", "a1*(a5*b4 - a1*b6)/a5^2")],
                         [("2*a1*b6 - a5*b4", 0)], lam="(2*a1*b6 - a5*b4)/a5"),
             "g11", _heat_4, invariants=(("Delta2", rf(DELTA2)),),
             parameter=lambda c: c / 4 - Fraction(1, 2)),
]


# -- ns4 ------------------------------------------------------------------------

DELTA3 = "(b1*b4 - b2*b3)/b1^2"


def _ns_1(v):
    a1, a2, a3, a4, b1, b4 = (v[k] for k in ("a1", "a2", "a3", "a4", "b1", "b4"))
    eps = [0.0, a2 / a1, -a3 / a1, 0.0]
    k = (a1, (a1 * a4 - a2 * a3) / a1, b1, (b4 * a1 * a1 - a2 * a3 * b1) / (a1 * a1))
    return eps, k


def _ns_21i(v):
    a2, a4, b2, b4 = (v[k] for k in ("a2", "a4", "b2", "b4"))
    return [0.0, 0.0, 0.0, 0.0], (a2, a4, b2, b4)


def _ns_21(sign):
    def witness(v):
        a2, a3, a4, b2, b4 = (v[k] for k in ("a2", "a3", "a4", "b2", "b4"))
        ratio = sign * a3 / a2
        s = math.sqrt(ratio)
        # e^{2 eps1} = +-a3/a2 balances the v2 and v3 components
        return [0.5 * math.log(ratio), 0.0, 0.0, 0.0], (s * a2, a4, s * b2, b4)
    return witness


def _ns_22(v):
    a3, a4, b3, b4 = (v[k] for k in ("a3", "a4", "b3", "b4"))
    return [0.0, 0.0, 0.0, 0.0], (a3, a4, b3, b4)


def _ns_3(v):
    a2, b1, b2, b3 = (v[k] for k in ("a2", "b1", "b2", "b3"))
    return [0.0, 0.0, -b3 / b1, 0.0], (a2, 0.0, b2, b1)


def _ns_4(v):
    a3, a4, b1, b3 = (v[k] for k in ("a3", "a4", "b1", "b3"))
    return [0.0, a4 / a3, 0.0, 0.0], (a3, 0.0, b3, b1)


NS_CASES: List[CaseSpec] = [
    CaseSpec("ns4", "1", "zero", _constraint("1", [("b2", "a2*b1/a1"), ("b3", "a3*b1/a1")]), "g'1", _ns_1),
    CaseSpec("ns4", "2.1(i)", "zero",
             _constraint("2.1(i)", [("a1", "0"), ("b1", "0"), ("a3", "0"), ("b3", "a3*b2/a2")]),
             "g'2", _ns_21i),
    CaseSpec("ns4", "2.1(ii)", "zero",
             _constraint("2.1(ii)", [("a1", "0"), ("b1", "0"), ("b3", "a3*b2/a2")], [("a2*a3", 1)]),
             "g'3", _ns_21(1), classifiers=(("a2a3", rf("a2*a3")),)),
    CaseSpec("ns4", "2.1(iii)", "zero",
             _constraint("2.1(iii)", [("a1", "0"), ("b1", "0"), ("b3", "a3*b2/a2")], [("a2*a3", -1)]),
             "g'4", _ns_21(-1), classifiers=(("a2a3", rf("a2*a3")),)),
    CaseSpec("ns4", "2.2", "zero",
             _constraint("2.2", [("a1", "0"), ("b1", "0"), ("a2", "0"), ("b2", "0")]), "g'5", _ns_22),
    CaseSpec("ns4", "3", "nonzero",
             _constraint("3", [("a1", "0"), ("a3", "0"), ("a4", "a2*b3/b1")], lam="b1"),
             "g'6", _ns_3, invariants=(("Delta3", rf(DELTA3)),), parameter=lambda c: c),
    CaseSpec("ns4", "4", "nonzero",
             _constraint("4", [("a1", "0"), ("a2", "0"), ("b2", "b1*a4/a3")], lam="-b1"),
             "g'7", _ns_4, invariants=(("Delta4", rf(DELTA3)),), parameter=lambda c: c),
]

CASES: Dict[str, List[CaseSpec]] = {"heat6": HEAT_CASES, "ns4": NS_CASES}


def get_case(algebra: str, name: str) -> CaseSpec:
    for case in CASES.get(algebra, []):
        if case.name == name:
            return case
    known = [c.name for c in CASES.get(algebra, [])]
    raise KeyError(f"unknown case {name!r} for {algebra}; known: {known}")
