"""Numerical equivalence of two-dimensional subalgebras and optimal-system checks.

Two pairs {w1, w2} (coefficients a, b) and {w1', w2'} (a', b') are
equivalent when some group element g = exp(eps_1 v_1)...exp(eps_n v_n) and
an invertible mixing (k1, k2, k3, k4) satisfy

    a @ A(eps) = k1*a' + k2*b',    b @ A(eps) = k3*a' + k4*b'.

The solver minimises this residual from several starts. A failure to find a
solution is reported as Unknown, never as a proof of inequivalence; proofs
of inequivalence come from invariants and sign classifiers instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from . import linalg
from .adjoint import numeric_adjoint
from .algebra import LieAlgebra
from .expr import RationalFunction
from .invariants import normalise_mode
from .subalgebra import AlgebraPair, ConstraintError, classify_pair, sample_constrained_pairs

DEFAULT_STARTS = 64
DEFAULT_TOLERANCE = 1e-10
SINGULARITY_FLOOR = 1e-8
START_BOX = 3.0
EPS_CLIP = 30.0  # bound for parameters inside exp(); exponents in the built-in algebras are at most 2*eps
SEPARATION_RTOL = 1e-6
MAX_NFEV = 300


class ModeMismatch(ValueError):
    """A lambda = 0 pair cannot be equivalent to a lambda != 0 pair."""


@dataclass(frozen=True)
class SolverConfig:
    starts: int = DEFAULT_STARTS
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    stop_at_first: bool = True


def pair_mode(L: LieAlgebra, p: AlgebraPair) -> str:
    cls = classify_pair(L, p)
    if cls.tag != "NormalizerForm":
        raise ValueError(f"pair is not of the form [w1, w2] = lambda*w1 ({cls})")
    return "zero" if cls.lam == 0 else "nonzero"


@dataclass(frozen=True)
class EquivalenceQuery:
    source: AlgebraPair
    target: AlgebraPair
    mode: str

    @staticmethod
    def build(L: LieAlgebra, source: AlgebraPair, target: AlgebraPair, mode: str | None = None) -> "EquivalenceQuery":
        ms, mt = pair_mode(L, source), pair_mode(L, target)
        if ms != mt:
            raise ModeMismatch(f"source has lambda {'= 0' if ms == 'zero' else '!= 0'} but target has "
                               f"lambda {'= 0' if mt == 'zero' else '!= 0'}; no mixing relates them")
        if mode is not None and normalise_mode(mode) != ms:
            raise ModeMismatch(f"both pairs have mode {ms!r}, query asked for {mode!r}")
        return EquivalenceQuery(source, target, ms)

    def to_json(self) -> dict:
        return {"source": self.source.to_json(), "target": self.target.to_json(), "mode": self.mode}


@dataclass
class Verdict:
    tag: str  # "Equivalent" | "Unknown"
    residual: float
    starts_used: int
    eps: Optional[List[float]] = None
    k: Optional[List[float]] = None
    start_index: Optional[int] = None
    backward_residual: Optional[float] = None
    component: Optional[str] = None  # fixed element applied after A(eps), if any

    @property
    def equivalent(self) -> bool:
        return self.tag == "Equivalent"

    def to_json(self) -> dict:
        doc = {"verdict": self.tag, "residual": self.residual, "starts_used": self.starts_used}
        if self.eps is not None:
            doc.update(eps=self.eps, k=self.k, start_index=self.start_index,
                       backward_residual=self.backward_residual)
        if self.component is not None:
            doc["component"] = self.component
        return doc

    def describe(self) -> str:
        if self.equivalent:
            eps = ", ".join(f"{x:.12g}" for x in self.eps)
            k = ", ".join(f"{x:.12g}" for x in self.k)
            text = (f"Equivalent (squared residual {self.residual:.3e}, start {self.start_index})\n"
                    f"  eps = [{eps}]\n  k = [{k}]")
            if self.component is not None:
                text += f"\n  group element = A(eps) followed by {self.component}"
            return text
        return f"Unknown (best squared residual {self.residual:.3e} after {self.starts_used} starts)"


class _Problem:
    """Residuals and Jacobian of the forward and backward equivalence equations.

    Unknowns are eps_1..eps_n followed by the free mixing entries (k1, k2,
    k3, k4, or k1, k3, k4 when k2 = 0). The backward block checks
    K @ [a' A^-1; b' A^-1] = [a; b], which rejects limits where A blows up
    and the forward residual only vanishes asymptotically.
    """

    def __init__(self, L: LieAlgebra, q: EquivalenceQuery):
        self.n = L.dim
        self.num = numeric_adjoint(L, None)
        self.a, self.b = (np.array([float(x) for x in v]) for v in (q.source.a, q.source.b))
        self.ta, self.tb = (np.array([float(x) for x in v]) for v in (q.target.a, q.target.b))
        self.upper = q.mode == "nonzero"
        self.nk = 3 if self.upper else 4
        scale = max(np.abs(np.concatenate([self.ta, self.tb])).max(), 1.0)
        self.penalty_floor = 1e-6 * scale * scale
        # only parameters that occur inside exp() need clipping to stay finite
        in_exp = {v for row in self.num.symbolic.matrix for e in row for (_, expo), _ in e.items() for v, _ in expo}
        self.clipped = np.array([f"eps{i + 1}" in in_exp for i in range(self.n)])
        self.lo = np.where(self.clipped, -EPS_CLIP, -np.inf)
        self.hi = np.where(self.clipped, EPS_CLIP, np.inf)

    def unpack(self, x):
        eps = np.minimum(np.maximum(x[: self.n], self.lo), self.hi)
        if self.upper:
            k1, k3, k4 = x[self.n:]
            k2 = 0.0
        else:
            k1, k2, k3, k4 = x[self.n:]
        return eps, (k1, k2, k3, k4)

    def pack(self, eps, k):
        k = list(k)
        if self.upper:
            k = [k[0], k[2], k[3]]
        return np.concatenate([np.asarray(eps, dtype=float), np.asarray(k, dtype=float)])

    def forward(self, x):
        eps, (k1, k2, k3, k4) = self.unpack(x)
        A = self.num.A(eps)
        return np.concatenate([self.a @ A - k1 * self.ta - k2 * self.tb,
                               self.b @ A - k3 * self.ta - k4 * self.tb])

    def backward(self, x):
        eps, (k1, k2, k3, k4) = self.unpack(x)
        B = self.num.Ainv(eps)
        pa, pb = self.ta @ B, self.tb @ B
        return np.concatenate([k1 * pa + k2 * pb - self.a, k3 * pa + k4 * pb - self.b])

    def residuals(self, x):
        _, (k1, k2, k3, k4) = self.unpack(x)
        det = k1 * k4 - k2 * k3
        pen = max(0.0, self.penalty_floor - abs(det))
        return np.concatenate([self.forward(x), self.backward(x), [pen]])

    def jacobian(self, x):
        n = self.n
        eps, (k1, k2, k3, k4) = self.unpack(x)
        dA = self.num.dA(eps)
        B = self.num.Ainv(eps)
        dB = self.num.dAinv(eps)
        J = np.zeros((4 * n + 1, n + self.nk))
        # column j holds d/d eps_j; dA[j] is the derivative matrix
        J[:n, :n] = np.einsum("i,jik->kj", self.a, dA)
        J[n:2 * n, :n] = np.einsum("i,jik->kj", self.b, dA)
        da = np.einsum("i,jik->kj", self.ta, dB)
        db = np.einsum("i,jik->kj", self.tb, dB)
        J[2 * n:3 * n, :n] = k1 * da + k2 * db
        J[3 * n:4 * n, :n] = k3 * da + k4 * db
        J[:, :n][:, (x[:n] < self.lo) | (x[:n] > self.hi)] = 0.0
        pa, pb = self.ta @ B, self.tb @ B
        cols = {"k1": n, "k2": None, "k3": n + 1, "k4": n + 2} if self.upper else \
            {"k1": n, "k2": n + 1, "k3": n + 2, "k4": n + 3}
        J[:n, cols["k1"]] = -self.ta
        J[2 * n:3 * n, cols["k1"]] = pa
        if cols["k2"] is not None:
            J[:n, cols["k2"]] = -self.tb
            J[2 * n:3 * n, cols["k2"]] = pb
        J[n:2 * n, cols["k3"]] = -self.ta
        J[3 * n:4 * n, cols["k3"]] = pa
        J[n:2 * n, cols["k4"]] = -self.tb
        J[3 * n:4 * n, cols["k4"]] = pb
        det = k1 * k4 - k2 * k3
        if abs(det) < self.penalty_floor:
            s = -1.0 if det >= 0 else 1.0
            J[4 * n, cols["k1"]] = s * k4
            J[4 * n, cols["k4"]] = s * k1
            J[4 * n, cols["k3"]] = -s * k2
            if cols["k2"] is not None:
                J[4 * n, cols["k2"]] = -s * k3
        return J


def start_points(n_unknowns: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-START_BOX, START_BOX, size=(count, n_unknowns))


def equivalence_solve(L: LieAlgebra, q: EquivalenceQuery, cfg: SolverConfig = SolverConfig(),
                      privileged: Sequence[Tuple[Sequence[float], Sequence[float]]] = ()) -> Verdict:
    """Multi-start damped least squares on the equivalence equations.

    ``privileged`` holds (eps, k) guesses tried before the ``cfg.starts``
    pseudo-random starts. The identity (eps = 0, k = (1, 0, 0, 1)) always
    goes first, so a pair compared with itself reports the trivial witness.
    With ``cfg.stop_at_first`` the search ends at the
    first start that certifies equivalence; otherwise the result with the
    smallest residual wins, ties going to the lowest start index.
    """
    prob = _Problem(L, q)
    xs = [prob.pack([0.0] * prob.n, [1.0, 0.0, 0.0, 1.0])]
    for eps, k in privileged:
        if k is not None and all(math.isfinite(v) for v in list(eps) + list(k)):
            xs.append(prob.pack(eps, k))
    xs.extend(start_points(prob.n + prob.nk, cfg.starts, cfg.seed))
    best: Optional[Tuple[float, int, np.ndarray, float]] = None
    found: Optional[Tuple[float, int, np.ndarray, float]] = None
    used = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for idx, x0 in enumerate(xs):
            used += 1
            try:
                sol = least_squares(prob.residuals, x0, jac=prob.jacobian, method="lm",
                                    xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=MAX_NFEV)
                x = sol.x
                fwd = prob.forward(x)
                res = float(fwd @ fwd)
                bwd = prob.backward(x)
                bres = float(bwd @ bwd)
            except (OverflowError, ValueError, FloatingPointError, np.linalg.LinAlgError):
                continue
            if not (math.isfinite(res) and math.isfinite(bres)):
                continue
            if best is None or res < best[0]:
                best = (res, idx, x, bres)
            _, (k1, k2, k3, k4) = prob.unpack(x)
            ok = (res < cfg.tolerance and bres < cfg.tolerance and abs(k1 * k4 - k2 * k3) > SINGULARITY_FLOOR
                  and np.all((x[: prob.n] > prob.lo) & (x[: prob.n] < prob.hi)))
            if ok and (found is None or res < found[0]):
                found = (res, idx, x, bres)
                if cfg.stop_at_first:
                    break
    if found is not None:
        res, idx, x, bres = found
        eps, k = prob.unpack(x)
        return Verdict("Equivalent", res, used, [float(e) for e in eps], [float(v) for v in k], idx, bres)
    return Verdict("Unknown", best[0] if best is not None else math.inf, used)


def _through(q: EquivalenceQuery, element) -> EquivalenceQuery:
    # a @ A @ Z = K t  is  a @ A = K (t @ Z^-1), so the element moves onto the target
    inv = element.inverse()
    t = q.target
    moved = AlgebraPair(tuple(linalg.matvec(linalg.transpose(inv), list(t.a))),
                        tuple(linalg.matvec(linalg.transpose(inv), list(t.b))))
    return EquivalenceQuery(q.source, moved, q.mode)


def solve_with_elements(L: LieAlgebra, q: EquivalenceQuery, cfg: SolverConfig = SolverConfig(),
                        privileged: Sequence[Tuple[Sequence[float], Sequence[float]]] = (),
                        elements: Sequence = ()) -> Verdict:
    """equivalence_solve, then the same search composed with each fixed group element.

    The chart eps -> A(eps) does not cover the whole adjoint group; the
    fixed elements (see ``lieopt.adjoint.FixedElement``) reach the rest.
    """
    v = equivalence_solve(L, q, cfg, privileged)
    used = v.starts_used
    best = v.residual
    for z in elements:
        if v.equivalent:
            break
        w = equivalence_solve(L, _through(q, z), cfg, privileged)
        used += w.starts_used
        if w.equivalent:
            w.component = z.label
            w.starts_used = used
            return w
        best = min(best, w.residual)
    if not v.equivalent:
        v.starts_used, v.residual = used, best
    return v


def witness_residual(L: LieAlgebra, q: EquivalenceQuery, eps, k, element=None) -> float:
    if element is not None:
        q = _through(q, element)
    prob = _Problem(L, q)
    r = prob.forward(prob.pack(eps, k))
    return float(r @ r)


# -- separation --------------------------------------------------------------------

@dataclass
class Separation:
    separated: bool
    reason: str = ""
    values: Dict[str, Tuple[str, str]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"separated": self.separated, "reason": self.reason,
                "values": {k: list(v) for k, v in self.values.items()}}


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def separation_report(L: LieAlgebra, p: AlgebraPair, q: AlgebraPair,
                      invariants: Sequence[Tuple[str, RationalFunction]] = (),
                      classifiers: Sequence[Tuple[str, RationalFunction]] = ()) -> Separation:
    """Compare invariant values (relative tolerance 1e-6) and classifier signs at two pairs.

    Evaluation is exact; a pole at either pair raises ZeroDivisionError.
    """
    pv, qv = p.values(), q.values()
    values: Dict[str, Tuple[str, str]] = {}
    for name, f in invariants:
        x, y = f.eval_exact(pv), f.eval_exact(qv)
        values[name] = (str(x), str(y))
        if abs(x - y) > SEPARATION_RTOL * max(1, abs(x), abs(y)):
            return Separation(True, f"{name}: {x} != {y}", values)
    for name, f in classifiers:
        x, y = f.eval_exact(pv), f.eval_exact(qv)
        values[name] = (str(x), str(y))
        if _sign(x) != _sign(y):
            return Separation(True, f"sign({name}): {_sign(x):+d} vs {_sign(y):+d}", values)
    return Separation(False, "", values)


# -- optimal systems -------------------------------------------------------------------

@dataclass
class RepEntry:
    label: str
    value: Optional[Fraction]
    pair: AlgebraPair
    mode: str

    @property
    def key(self) -> str:
        return self.label if self.value is None else f"{self.label}[{self.value}]"


@dataclass
class OptimalSystemReport:
    algebra: str
    representatives: List[dict]
    pairs: List[dict]
    coverage: List[dict]
    passed: bool

    def to_json(self) -> dict:
        return {"algebra": self.algebra, "passed": self.passed, "representatives": self.representatives,
                "pairs": self.pairs, "coverage": self.coverage}

    def render(self) -> str:
        lines = [f"optimal system for {self.algebra}: {'PASS' if self.passed else 'FAIL'}", "representatives:"]
        for r in self.representatives:
            lines.append(f"  {r['key']}: {r['pair']} lambda={r['lambda']} {'ok' if r['ok'] else 'FAIL'}")
        lines.append("pairwise:")
        for p in self.pairs:
            lines.append(f"  {p['a']} vs {p['b']}: {p['status']}" + (f" ({p['reason']})" if p.get("reason") else ""))
        lines.append("coverage:")
        for c in self.coverage:
            lines.append(f"  case {c['case']} -> {c['target']}: {c['reached']}/{c['samples']} "
                         f"{'ok' if c['ok'] else 'FAIL'}" + (f" ({c['note']})" if c.get("note") else ""))
        return "\n".join(lines)


def _home_cases(cases, label: str):
    return [c for c in cases if c.representative == label]


def compare_representatives(L: LieAlgebra, x: RepEntry, y: RepEntry, cases, cfg: SolverConfig,
                            elements: Sequence = ()) -> dict:
    doc = {"a": x.key, "b": y.key}
    if x.mode != y.mode:
        doc.update(status="separated", reason="lambda = 0 vs lambda != 0")
        return doc
    cx, cy = _home_cases(cases, x.label), _home_cases(cases, y.label)
    inv, cls = [], []
    if cx and cy:
        names_y = {n for c in cy for n, _ in c.invariants}
        cnames_y = {n for c in cy for n, _ in c.classifiers}
        inv = [(n, f) for n, f in cx[0].invariants if n in names_y]
        cls = [(n, f) for n, f in cx[0].classifiers if n in cnames_y]
    try:
        sep = separation_report(L, x.pair, y.pair, inv, cls)
    except ZeroDivisionError:
        sep = Separation(False, "pole")
    if sep.separated:
        doc.update(status="separated", reason=sep.reason)
        return doc
    v = solve_with_elements(L, EquivalenceQuery.build(L, x.pair, y.pair), cfg, elements=elements)
    if v.equivalent:
        doc.update(status="equivalent", reason="", witness=v.to_json())
    else:
        doc.update(status="unknown", reason=f"best squared residual {v.residual:.3e} after {v.starts_used} starts")
    return doc


def case_coverage(L: LieAlgebra, case, system, samples: int, seed: int, cfg: SolverConfig,
                  fallback_samples: int = 2, elements: Sequence = ()) -> dict:
    """Sample the case and solve for its designated representative, using the case witness as a start.

    When the designated representative is absent, the first
    ``fallback_samples`` samples are tried against every representative of
    the same mode with pseudo-random starts and the fixed elements.
    """
    doc = {"case": case.name, "target": case.representative, "samples": samples, "reached": 0,
           "min_fraction": 0.95}
    reps = {r.label: r for r in system}
    try:
        pts = sample_constrained_pairs(L, case.constraint, samples, seed)
    except ConstraintError as exc:
        doc.update(ok=False, note=str(exc))
        return doc
    target = reps.get(case.representative)
    if target is None:
        reached = 0
        others = [r for r in system if r.mode == case.mode]
        tried = 0
        for s in pts[:fallback_samples]:
            for r in others:
                value = case.target_parameter(s.values) if r.param is not None else None
                if r.param is not None and value is None:
                    continue
                tried += 1
                v = solve_with_elements(L, EquivalenceQuery.build(L, s.pair, r.pair(L, value)), cfg,
                                        elements=elements)
                if v.equivalent:
                    reached += 1
                    break
        doc.update(samples=min(samples, fallback_samples), reached=reached, ok=False,
                   note=f"designated representative {case.representative} is not in the system; "
                        f"{tried} fallback queries, {reached} reached")
        return doc
    worst = 0.0
    reached = 0
    for s in pts:
        value = case.target_parameter(s.values)
        tp = target.pair(L, value)
        fv = {k: float(x) for k, x in s.values.items()}
        try:
            privileged = [case.witness(fv)]
        except (ValueError, ZeroDivisionError, OverflowError):
            privileged = []
        v = equivalence_solve(L, EquivalenceQuery.build(L, s.pair, tp), cfg, privileged)
        if v.equivalent:
            reached += 1
            worst = max(worst, v.residual)
    doc.update(reached=reached, ok=reached >= 0.95 * samples, worst_residual=worst)
    return doc


def verify_optimal_system(L: LieAlgebra, system, cases, parameters: Sequence[Fraction],
                          cfg: SolverConfig = SolverConfig(), samples: int = 50, seed: int = 0,
                          coverage: bool = True, pairwise: bool = True,
                          coverage_cases: Sequence[str] | None = None,
                          elements: Sequence = ()) -> OptimalSystemReport:
    """Subalgebra check, pairwise separation and case coverage for a list of representatives.

    ``coverage_cases`` limits the coverage stage to the named cases; the
    pairwise stage always sees every case for its invariants and classifiers.
    """
    entries = []
    reps = []
    ok = True
    for rep in system:
        values = parameters if rep.param is not None else [None]
        for v in values:
            try:
                p = rep.pair(L, v)
                cls = classify_pair(L, p)
                good = cls.tag == "NormalizerForm" and (cls.lam == 0) == (rep.mode == "zero")
                lam = str(cls.lam)
            except ValueError:
                p, good, lam = None, False, "-"
            e = RepEntry(rep.label, v, p, rep.mode)
            reps.append({"key": e.key, "pair": rep.describe(v), "lambda": lam, "ok": good})
            ok &= good
            if good:
                entries.append(e)
    pairs = []
    for i in range(len(entries) if pairwise else 0):
        for j in range(i + 1, len(entries)):
            doc = compare_representatives(L, entries[i], entries[j], cases, cfg, elements)
            ok &= doc["status"] != "equivalent"
            pairs.append(doc)
    cov = []
    if coverage:
        for case in cases:
            if coverage_cases is not None and case.name not in coverage_cases:
                continue
            doc = case_coverage(L, case, system, samples, seed, cfg, elements=elements)
            ok &= doc["ok"]
            cov.append(doc)
    return OptimalSystemReport(L.name, reps, pairs, cov, ok)
