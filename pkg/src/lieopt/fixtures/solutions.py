"""Closed-form group-invariant solutions of the vorticity equation and their residuals.

The stream-function form checked here is

    psi_xxt + psi_yyt + psi_x psi_xxy + psi_x psi_yyy - psi_y psi_xxx - psi_y psi_xyy
        - gamma (psi_xxxx + 2 psi_xxyy + psi_yyyy) = 0.

Derivatives are central finite differences with exact rational weights,
evaluated in extended precision, with one Richardson extrapolation step
between step sizes h and h/2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Tuple

import numpy as np

from .. import linalg

LD = np.longdouble


class SingularGrid(ValueError):
    """A stencil point touches the singular locus of the solution."""


@dataclass(frozen=True)
class ClosedFormSolution:
    """A named solution with its constants.

    ``kind`` is "ns" for psi(x, y, t) or "ode" for a function of one variable.
    """

    identifier: str
    kind: str
    params: Tuple[Tuple[str, Fraction], ...]
    evaluator: Callable = field(compare=False, repr=False)
    # radial forms are singular at the origin; angular forms need x > min_x
    radial: bool = False
    min_x: float = -np.inf

    def param(self, name: str) -> LD:
        v = dict(self.params)[name]
        return LD(v.numerator) / LD(v.denominator)

    def __call__(self, *args):
        return self.evaluator(self, *args)

    def to_json(self) -> dict:
        return {"identifier": self.identifier, "kind": self.kind, "params": {k: str(v) for k, v in self.params}}


def _fr(x) -> Fraction:
    return Fraction(x) if not isinstance(x, str) else Fraction(x)


def _radial(sol, x, y, t):
    xi = x * x + y * y
    g = sol.param("gamma")
    s = sol.param("sign")
    c1, c2, c3, c4 = (sol.param(f"c{i}") for i in range(1, 5))
    return c1 + c2 * xi + c3 * np.log(xi) + c4 * xi * (np.log(xi) - 1) + s * (xi * xi / (32 * g) + t * xi / 2)


def _radial_branch(sol, x, y, t):
    # the reduction's second branch: F keeps the xi^2/(32 gamma) term, the t-term flips
    xi = x * x + y * y
    g = sol.param("gamma")
    c1, c2, c3, c4 = (sol.param(f"c{i}") for i in range(1, 5))
    return c1 + c2 * xi + c3 * np.log(xi) + c4 * xi * (np.log(xi) - 1) + xi * xi / (32 * g) - t * xi / 2


def _tanh(sol, x, y, t):
    g, c0, c1 = sol.param("gamma"), sol.param("c0"), sol.param("c1")
    theta = np.arctan2(y, x)
    return -6 * g * np.tanh(theta + c0) + 4 * g * theta + c1 + 0 * t


def _constant(sol, x, y, t):
    return sol.param("c1") + 0 * (x + y + t)


def _red1_F(sol, xi):
    g = sol.param("gamma")
    c1, c2, c3, c4 = (sol.param(f"c{i}") for i in range(1, 5))
    return c1 + c2 * xi + c3 * np.log(xi) + c4 * xi * (np.log(xi) - 1) + xi * xi / (32 * g)


def _red2_G(sol, xi):
    g, c0 = sol.param("gamma"), sol.param("c0")
    return -6 * g / np.cosh(xi + c0) ** 2 + 4 * g


def _zero(sol, xi):
    return 0 * xi


def _params(**kw) -> Tuple[Tuple[str, Fraction], ...]:
    return tuple((k, _fr(v)) for k, v in kw.items())


def ns_radial(gamma="1", c=("1", "1", "1", "1"), sign=1) -> ClosedFormSolution:
    """psi = c1 + c2 xi + c3 ln xi + c4 xi (ln xi - 1) + xi^2/(32 gamma) + t xi/2 with xi = x^2 + y^2.

    ``sign = -1`` mirrors the whole xi^2 and t parts, which is the matching
    solution of the other branch of the radial reduction.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return ClosedFormSolution("ns_radial", "ns", _params(gamma=gamma, sign=sign, c1=c[0], c2=c[1], c3=c[2], c4=c[3]),
                              _radial, radial=True)


def ns_radial_branch(gamma="1", c=("1", "1", "1", "1")) -> ClosedFormSolution:
    """The printed radial F combined with -t xi/2; not a solution (the residual is -4 everywhere)."""
    return ClosedFormSolution("ns_radial_branch", "ns", _params(gamma=gamma, c1=c[0], c2=c[1], c3=c[2], c4=c[3]),
                              _radial_branch, radial=True)


def ns_tanh(gamma="1", c0="0", c1="0") -> ClosedFormSolution:
    """psi = -6 gamma tanh(theta + c0) + 4 gamma theta + c1 with theta = atan2(y, x), used on x > 0."""
    return ClosedFormSolution("ns_tanh", "ns", _params(gamma=gamma, c0=c0, c1=c1), _tanh, min_x=0.0)


def ns_constant(c1="3") -> ClosedFormSolution:
    return ClosedFormSolution("ns_constant", "ns", _params(c1=c1), _constant)


def red1_F(gamma="1", c=("1", "1", "1", "1")) -> ClosedFormSolution:
    return ClosedFormSolution("red1_F", "ode", _params(gamma=gamma, c1=c[0], c2=c[1], c3=c[2], c4=c[3]), _red1_F)


def red2_G(gamma="1", c0="0") -> ClosedFormSolution:
    return ClosedFormSolution("red2_G", "ode", _params(gamma=gamma, c0=c0), _red2_G)


def zero_solution() -> ClosedFormSolution:
    return ClosedFormSolution("zero", "ode", (), _zero)


SOLUTIONS: Dict[str, Callable[..., ClosedFormSolution]] = {
    "ns_radial": ns_radial, "ns_radial_branch": ns_radial_branch, "ns_tanh": ns_tanh,
    "ns_constant": ns_constant, "red1_F": red1_F, "red2_G": red2_G, "zero": zero_solution,
}


# -- finite differences -----------------------------------------------------------

@lru_cache(maxsize=None)
def central_weights(m: int, order: int) -> Tuple[Tuple[int, Fraction], ...]:
    """Exact weights w_j, j = -r..r, with f^(m)(0) ~ h^-m sum w_j f(jh) to O(h^order)."""
    if order % 2:
        raise ValueError("central stencils need an even order")
    r = (m - 1) // 2 + order // 2
    pts = list(range(-r, r + 1))
    V = [[Fraction(p) ** k for p in pts] for k in range(len(pts))]
    rhs = [Fraction(0)] * len(pts)
    rhs[m] = Fraction(math.factorial(m))
    w = linalg.solve(V, rhs)
    return tuple((p, c) for p, c in zip(pts, w) if c != 0)


def stencil_radius(m: int, order: int) -> int:
    return (m - 1) // 2 + order // 2 if m else 0


def fd_partial(f, point: Tuple[np.ndarray, ...], orders: Tuple[int, ...], h, order: int):
    """Mixed partial derivative of f at (arrays of) points by a tensor-product central stencil."""
    hs = LD(h)
    stencils = [central_weights(m, order) if m else ((0, Fraction(1)),) for m in orders]
    total = 0
    for combo in itertools.product(*stencils):
        w = LD(1)
        shifted = []
        for (j, c), x in zip(combo, point):
            w *= LD(c.numerator) / LD(c.denominator)
            shifted.append(x + j * hs)
        total = total + w * f(*shifted)
    scale = hs ** sum(orders)
    return total / scale


NS_TERMS = {
    "xxt": (2, 0, 1), "yyt": (0, 2, 1), "x": (1, 0, 0), "y": (0, 1, 0), "xxy": (2, 1, 0), "yyy": (0, 3, 0),
    "xxx": (3, 0, 0), "xyy": (1, 2, 0), "xxxx": (4, 0, 0), "xxyy": (2, 2, 0), "yyyy": (0, 4, 0),
}


def _ns_operator(f, pts, h, order, gamma):
    d = {k: fd_partial(f, pts, v, h, order) for k, v in NS_TERMS.items()}
    return (d["xxt"] + d["yyt"] + d["x"] * d["xxy"] + d["x"] * d["yyy"] - d["y"] * d["xxx"] - d["y"] * d["xyy"]
            - gamma * (d["xxxx"] + 2 * d["xxyy"] + d["yyyy"]))


@dataclass(frozen=True)
class GridSpec:
    """Polar grid: radius in [r_min, r_max], angle in [theta_min, theta_max], t in [t_min, t_max]."""

    r_min: float = 1.0
    r_max: float = 2.0
    theta_min: float = 0.0
    theta_max: float = 2 * np.pi
    t_min: float = 1.0
    t_max: float = 2.0
    n_r: int = 5
    n_theta: int = 8
    n_t: int = 3
    step: float = 1e-2
    order: int = 6
    richardson: bool = True

    def points(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = np.linspace(self.r_min, self.r_max, self.n_r, dtype=LD)
        endpoint = not np.isclose(self.theta_max - self.theta_min, 2 * np.pi)
        th = np.linspace(self.theta_min, self.theta_max, self.n_theta, endpoint=endpoint)
        t = np.linspace(self.t_min, self.t_max, self.n_t, dtype=LD)
        R, TH, T = np.meshgrid(r, th.astype(LD), t, indexing="ij")
        return (R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel(), T.ravel()

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


ANNULUS = GridSpec()
SECTOR = GridSpec(theta_min=-1.2, theta_max=1.2)


@dataclass
class ResidualReport:
    max: float
    argmax: Tuple[float, ...]
    grid: dict
    solution: dict

    def to_json(self) -> dict:
        return {"max": self.max, "argmax": list(self.argmax), "grid": self.grid, "solution": self.solution}


def _check_domain(sol: ClosedFormSolution, x, y, reach: float):
    rho = np.sqrt(x * x + y * y)
    if sol.radial and float(rho.min()) - reach <= 1e-3:
        raise SingularGrid(f"stencils reach within {reach:.3g} of the origin")
    if float(x.min()) - reach <= sol.min_x:
        raise SingularGrid("stencils cross x = 0, where the angular chart breaks")


def _extrapolate(op, h, order, richardson):
    coarse = op(h)
    if not richardson:
        return coarse
    fine = op(h / 2)
    q = LD(2) ** order
    return (q * fine - coarse) / (q - 1)


def ns_residual(sol: ClosedFormSolution, grid: GridSpec = ANNULUS) -> ResidualReport:
    """Max |NS(psi)| over the grid (gamma taken from the solution, default 1)."""
    if sol.kind != "ns":
        raise ValueError(f"{sol.identifier} is not a function of (x, y, t)")
    x, y, t = grid.points()
    reach = stencil_radius(4, grid.order) * grid.step
    _check_domain(sol, x, y, reach)
    gamma = sol.param("gamma") if "gamma" in dict(sol.params) else LD(1)
    f = lambda X, Y, T: sol(X, Y, T)  # noqa: E731
    res = _extrapolate(lambda h: _ns_operator(f, (x, y, t), h, grid.order, gamma), grid.step, grid.order,
                       grid.richardson)
    a = np.abs(res)
    i = int(np.argmax(a))
    return ResidualReport(float(a[i]), (float(x[i]), float(y[i]), float(t[i])), grid.to_json(), sol.to_json())


@dataclass(frozen=True)
class LineGrid:
    lo: float
    hi: float
    n: int = 41
    # xi^2 F'''' amplifies rounding as h^-4, so the line grid uses a coarser step
    step: float = 5e-2
    order: int = 6
    richardson: bool = True

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def reduced_ode_residual(ode: str, sol: ClosedFormSolution, grid: LineGrid, c="0", gamma="1",
                         branch: int = 1) -> ResidualReport:
    """Residual of one of the reduced equations along a line grid.

    red1: 8 gamma (xi^2 F'''' + 4 xi F''' + 2 F'') - branch (branch = +1 pairs with +t xi/2).
    red2: gamma ((4c^2 + 1) G'' + 8c G' + 4G) - G^2.
    """
    if sol.kind != "ode":
        raise ValueError(f"{sol.identifier} is not a function of one variable")
    xi = np.linspace(grid.lo, grid.hi, grid.n, dtype=LD)
    g = LD(Fraction(gamma).numerator) / LD(Fraction(gamma).denominator)
    cc = LD(Fraction(c).numerator) / LD(Fraction(c).denominator)
    reach = stencil_radius(4, grid.order) * grid.step
    f = lambda X: sol(X)  # noqa: E731
    if ode == "red1":
        if grid.lo - reach <= 0:
            raise SingularGrid("red1 needs xi > 0 on every stencil")

        def op(h):
            d2, d3, d4 = (fd_partial(f, (xi,), (m,), h, grid.order) for m in (2, 3, 4))
            return 8 * g * (xi * xi * d4 + 4 * xi * d3 + 2 * d2) - branch
    elif ode == "red2":
        def op(h):
            G = f(xi)
            d1, d2 = (fd_partial(f, (xi,), (m,), h, grid.order) for m in (1, 2))
            return g * ((4 * cc * cc + 1) * d2 + 8 * cc * d1 + 4 * G) - G * G
    else:
        raise ValueError(f"unknown reduced equation {ode!r}; expected red1 or red2")
    res = _extrapolate(op, grid.step, grid.order, grid.richardson)
    a = np.abs(res)
    i = int(np.argmax(a))
    return ResidualReport(float(a[i]), (float(xi[i]),), grid.to_json(), sol.to_json())


def convergence_ratio(sol: ClosedFormSolution, grid: GridSpec) -> float:
    """Residual at step h divided by the residual at h/2, without extrapolation."""
    base = GridSpec(**{**grid.to_json(), "richardson": False})
    half = GridSpec(**{**base.to_json(), "step": grid.step / 2})
    return ns_residual(sol, base).max / ns_residual(sol, half).max
