"""Acceptance criteria, one test (or a few parts) per criterion.

Each test records a pass/fail line; the terminal summary prints one line per
criterion. Criteria that cannot be met are strict xfails: the check itself is
unchanged, and the recorded line says NOT MET.
"""

import contextlib
import copy
import io
import json
import random
from pathlib import Path

import numpy as np
import pytest
import sympy

from conftest import Timer
from golden import (HEAT_A, HEAT_ADJOINT, HEAT_COMMUTATOR, HEAT_DETERMINED, HEAT_PDE_ZERO_EXTRA, HEAT_PDES,
                    INVARIANTS, NS_A, NS_ADJOINT, NS_COMMUTATOR, NS_DETERMINED, NS_PDE_ZERO_EXTRA, NS_PDES)
from test_invariants import reference_field
from lieopt.adjoint import _general_adjoint_cached, general_adjoint_matrix, numeric_adjoint
from lieopt.algebra import JacobiViolation, jacobi_check, load_algebra
from lieopt.cli import main
from lieopt.equivalence import EquivalenceQuery, SolverConfig, case_coverage, solve_with_elements, \
    verify_optimal_system, witness_residual
from lieopt.expr import parse_rational_function
from lieopt.exppoly import ep_equal, parse_exppoly
from lieopt.fixtures import (CASES, DEFAULT_PARAMETERS, DOCUMENTS, SECTOR, SYSTEMS, GridSpec, LineGrid,
                             builtin_algebra, fixed_elements, get_case, ns_residual, reduced_ode_residual)
from lieopt.fixtures.solutions import convergence_ratio, ns_radial, ns_tanh, red1_F, red2_G
from lieopt.invariants import (assemble_rational_invariants, check_invariant, discover_semi_invariants,
                               invariant_pde_system, random_mixing)
from lieopt.subalgebra import determined_equations, sample_constrained_pairs

DATA = Path(__file__).parent / "data"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


# -- 1. golden tables ------------------------------------------------------------------

@pytest.mark.parametrize("name, comm, adj", [("heat6", HEAT_COMMUTATOR, HEAT_ADJOINT),
                                             ("ns4", NS_COMMUTATOR, NS_ADJOINT)])
def test_c1_golden_tables(record, name, comm, adj):
    with Timer() as t:
        code, out, _ = run("tables", "--algebra", name, "--format", "json")
    doc = json.loads(out)
    bad = [(kind, i + 1, j + 1)
           for kind, golden in (("commutator", comm), ("adjoint", adj))
           for i, row in enumerate(golden) for j, cell in enumerate(row)
           if parse_exppoly(doc[kind][i][j]) != parse_exppoly(cell)]
    text_code, text, _ = run("tables", "--algebra", name)
    stable = text_code == 0 and text == (DATA / f"tables_{name}.txt").read_text(encoding="utf-8")
    cells = 2 * len(comm) ** 2
    ok = code == 0 and not bad and stable and t.seconds < 1
    record.part(1, ok, f"{name} {cells - len(bad)}/{cells} cells, text output stable={stable}", t.seconds)
    assert ok, bad


# -- 2. general adjoint matrix ---------------------------------------------------------------

def test_c2_adjoint_matrix(record, heat, ns):
    _general_adjoint_cached.cache_clear()
    with Timer() as t:
        A = general_adjoint_matrix(heat)
        B = general_adjoint_matrix(ns)
    bad = [("heat6", i, j) for (i, j), text in HEAT_A.items() if not ep_equal(A.entry(i, j), parse_exppoly(text))]
    bad += [("ns4", i + 1, j + 1) for i, row in enumerate(NS_A) for j, text in enumerate(row)
            if not ep_equal(B.entry(i + 1, j + 1), parse_exppoly(text))]
    example = parse_exppoly("4*eps2*eps6*exp(2*eps4) + eps5*exp(eps4)*(eps1 + 2*eps2*eps5*exp(eps4))")
    ok = not bad and len(HEAT_A) == 36 and ep_equal(A.entry(4, 3), example) and t.seconds < 5
    record.part(2, ok, f"heat6 {36 - sum(b[0] == 'heat6' for b in bad)}/36 and "
                       f"ns4 {16 - sum(b[0] == 'ns4' for b in bad)}/16 entries exact", t.seconds)
    assert ok, bad


# -- 3. determined equations -----------------------------------------------------------------

@pytest.mark.parametrize("name, golden", [("heat6", HEAT_DETERMINED), ("ns4", NS_DETERMINED)])
def test_c3_determined_equations(record, name, golden):
    got = list(determined_equations(builtin_algebra(name)).equations)
    want = [parse_exppoly(t) for t in golden]
    unmatched = list(got)
    missing = []
    for w in want:
        hit = [g for g in unmatched if g == w or g == -w]
        if len(hit) == 1:
            unmatched.remove(hit[0])
        else:
            missing.append(str(w))
    ok = not missing and not unmatched
    record.part(3, ok, f"{name} {len(got)} equations, {len(want) - len(missing)}/{len(want)} matched up to sign")
    assert ok, (missing, [str(u) for u in unmatched])


# -- 4. invariant PDE systems ----------------------------------------------------------------

def _matched(got, want):
    unmatched = list(got)
    count = 0
    for w in want:
        hits = [g for g in unmatched if g.proportional(w) is not None]
        if len(hits) == 1:
            unmatched.remove(hits[0])
            count += 1
    return count, not unmatched


@pytest.mark.parametrize("name, n, base, extra, counts", [("heat6", 6, HEAT_PDES, HEAT_PDE_ZERO_EXTRA, (9, 8)),
                                                          ("ns4", 4, NS_PDES, NS_PDE_ZERO_EXTRA, (7, 6))])
def test_c4_invariant_pde_systems(record, name, n, base, extra, counts):
    L = builtin_algebra(name)
    zero = invariant_pde_system(L, "lambda_zero")
    nonzero = invariant_pde_system(L, "lambda_nonzero")
    mz, cz = _matched(zero, [reference_field(t, n) for t in base + [extra]])
    mn, cn = _matched(nonzero, [reference_field(t, n) for t in base])
    ok = (len(zero), len(nonzero)) == counts and mz == counts[0] and mn == counts[1] and cz and cn
    record.part(4, ok, f"{name} zero {len(zero)} ({mz} matched), nonzero {len(nonzero)} ({mn} matched), "
                       "each up to a nonzero rational factor")
    assert ok


# -- 5. invariant verification ---------------------------------------------------------------

def test_c5_invariants(record):
    worst = {}
    ok = True
    with Timer() as t:
        for key in sorted(INVARIANTS):
            algebra, case, text = INVARIANTS[key]
            c = get_case(algebra, case)
            rep = check_invariant(builtin_algebra(algebra), parse_rational_function(text), c.mode, c.constraint,
                                  flow_trials=200)
            worst[key] = rep.flow_max_deviation
            ok &= rep.passed and rep.flow_max_deviation < 1e-8
    ok &= t.seconds < 10
    detail = ", ".join(f"{k} flow {v:.1e}" for k, v in worst.items())
    record.part(5, ok, f"{detail} over 200 trials each", t.seconds)
    assert ok


# -- 6. semi-invariant discovery -------------------------------------------------------------

DELTA3 = parse_rational_function(INVARIANTS["Delta3"][2])


@pytest.mark.xfail(strict=True, reason="on the full space the b <- b + t*a field moves (b1*b4 - b2*b3)/b1^2, "
                                       "so no unconstrained search returns it")
def test_c6_discovery_unconstrained(record, ns):
    with Timer() as t:
        found = assemble_rational_invariants(discover_semi_invariants(ns, "lambda_nonzero", 2))
    hit = any(f.proportional_to(DELTA3) is not None for f in found)
    record.part(6, hit, f"unconstrained call returns {[str(f) for f in found]}, without Delta3", t.seconds)
    assert hit and t.seconds < 5


def test_c6_discovery_on_case_3(record, ns):
    with Timer() as t:
        found = assemble_rational_invariants(
            discover_semi_invariants(ns, "lambda_nonzero", 2, get_case("ns4", "3").constraint))
    hit = [str(f) for f in found if f.proportional_to(DELTA3) is not None]
    ok = bool(hit) and t.seconds < 5
    record.part(6, ok, f"case-3 call returns {hit}", t.seconds)
    assert ok


# -- 7. case coverage ----------------------------------------------------------------------

def test_c7_case_coverage(record):
    ok = True
    with Timer() as t:
        for algebra in ("heat6", "ns4"):
            L = builtin_algebra(algebra)
            docs = [case_coverage(L, c, SYSTEMS[algebra], 50, 0, SolverConfig()) for c in CASES[algebra]]
            good = all(d["ok"] and d["worst_residual"] < 1e-10 for d in docs)
            ok &= good
            low = min(d["reached"] for d in docs)
            record.part(7, good, f"{algebra} {len(docs)} cases, every case >= {low}/50 reached")
    ok &= t.seconds < 60
    record.part(7, t.seconds < 60, "total", t.seconds)
    assert ok


# -- 8. optimal systems ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def heat_report(heat):
    with Timer() as t:
        report = verify_optimal_system(heat, SYSTEMS["heat6"], CASES["heat6"], DEFAULT_PARAMETERS["heat6"],
                                       SolverConfig(), coverage=False, elements=fixed_elements("heat6"))
    return report, t.seconds


def _equivalent(report):
    return [f"{p['a']} vs {p['b']}" for p in report.pairs if p["status"] == "equivalent"]


def _cross_pairs_settled(report, starts=64):
    for p in report.pairs:
        if p["status"] == "unknown" and int(p["reason"].split(" after ")[1].split()[0]) < starts:
            return False
    return True


@pytest.mark.xfail(strict=True, reason="g7 and g8 are equivalent through Ad(exp(pi*(v2/4 + v6)))")
def test_c8_eleven_member_heat_system(record, heat_report):
    report, seconds = heat_report
    ok = report.passed and seconds < 300
    record.part(8, ok, f"heat6 11-member system: equivalent pairs {_equivalent(report)}", seconds)
    assert ok


def test_c8_ns_system(record, ns):
    with Timer() as t:
        report = verify_optimal_system(ns, SYSTEMS["ns4"], CASES["ns4"], DEFAULT_PARAMETERS["ns4"],
                                       SolverConfig(), coverage=False)
    ok = report.passed and not _equivalent(report) and _cross_pairs_settled(report) and t.seconds < 300
    record.part(8, ok, f"ns4 system: {len(report.pairs)} pairs, none equivalent", t.seconds)
    assert ok


def test_c8_heat_system_without_g8(record, heat, heat_report):
    report, _ = heat_report
    rest = [p for p in report.pairs if "g8" not in (p["a"], p["b"])]
    clean = all(p["status"] != "equivalent" for p in rest) and _cross_pairs_settled(report)
    # case iiic- lands on g7 once the fixed element is allowed
    z = fixed_elements("heat6")
    g7 = {r.label: r for r in SYSTEMS["heat6"]}["g7"].pair(heat)
    case = get_case("heat6", "iiic-")
    reached = 0
    with Timer() as t:
        for s in sample_constrained_pairs(heat, case.constraint, 10, 0):
            q = EquivalenceQuery.build(heat, s.pair, g7)
            w = case.witness({k: float(x) for k, x in s.values.items()})
            v = solve_with_elements(heat, q, SolverConfig(starts=4), [w], z)
            reached += v.equivalent and witness_residual(heat, q, v.eps, v.k, z[0]) < 1e-10
    ok = clean and reached == 10
    record.part(8, ok, f"heat system without g8: {len(rest)} pairs none equivalent, iiic- reaches g7 "
                       f"{reached}/10", t.seconds)
    assert ok


# -- 9. sign classifiers ---------------------------------------------------------------------

VARS = sympy.symbols("a1:7 b1:7")
LAMBDA1 = "2*a6*(a4*(a5*b6 - b5*a6)**2 - 2*a6*(a3*b6 - b3*a6)**2 - 2*a6*(a5*b6 - b5*a6)*(a3*b5 - b3*a5))"


def _banded_sign(terms, values):
    parts = terms(*values)
    total, scale = sum(parts), sum(abs(x) for x in parts)
    if abs(total) <= 1e-9 * scale:
        return 0
    return 1 if total > 0 else -1


def _violations(heat, expr, case_names, trials=500, seed=0):
    terms = sympy.lambdify(VARS, list(sympy.Add.make_args(sympy.expand(sympy.sympify(expr)))), "math")
    pts = [s.pair for name in case_names
           for s in sample_constrained_pairs(heat, get_case("heat6", name).constraint, 20, seed)]
    adj = numeric_adjoint(heat)
    rng = random.Random(seed)
    bad = 0
    for i in range(trials):
        p = pts[i % len(pts)]
        a, b = np.array([float(x) for x in p.a]), np.array([float(x) for x in p.b])
        A = adj.A([rng.uniform(-1.5, 1.5) for _ in range(6)])
        k1, k2, k3, k4 = random_mixing(rng, "zero", 2.0)
        ga, gb = a @ A, b @ A
        moved = np.concatenate([k1 * ga + k2 * gb, k3 * ga + k4 * gb])
        bad += _banded_sign(terms, np.concatenate([a, b])) != _banded_sign(terms, moved)
    return bad


@pytest.mark.parametrize("label, expr, cases", [
    ("sign(Lambda1) on (ii)", LAMBDA1, ("iia", "iib", "iic")),
    ("sign(4a2a6 - a4^2) on (iii)", "4*a2*a6 - a4**2", ("iiia", "iiib", "iiic+", "iiic-")),
    pytest.param("sign(2a1a6 - a4a5) on (iiic)", "2*a1*a6 - a4*a5", ("iiic+", "iiic-"),
                 marks=pytest.mark.xfail(strict=True, reason="Ad(exp(eps*v6)) shifts 2a1a6 - a4a5 when a4 != 0")),
])
def test_c9_sign_classifiers(record, heat, label, expr, cases):
    bad = _violations(heat, expr, cases)
    record.part(9, bad == 0, f"{label}: {bad}/500 violations")
    assert bad == 0


# -- 10. solution residuals --------------------------------------------------------------------

def test_c10_solution_residuals(record):
    with Timer() as t:
        ns_max = max([ns_residual(ns_radial(gamma=g)).max for g in ("1/2", "1")]
                     + [ns_residual(ns_tanh(gamma=g), SECTOR).max for g in ("1/2", "1")])
        ode_max = max([reduced_ode_residual("red1", red1_F(gamma=g), LineGrid(1, 3), gamma=g).max
                       for g in ("1/2", "1")]
                      + [reduced_ode_residual("red2", red2_G(gamma=g), LineGrid(-2, 2), gamma=g).max
                         for g in ("1/2", "1")])
        grid = GridSpec(r_min=1.5, r_max=2, theta_min=-0.8, theta_max=0.8, n_r=3, n_theta=4, n_t=2, step=0.2)
        ratios = {o: convergence_ratio(ns_tanh(), GridSpec(**{**grid.to_json(), "order": o})) for o in (2, 4, 6)}
    orders_ok = all(r > 2 ** (o - 1) for o, r in ratios.items())
    ok = ns_max < 1e-4 and ode_max < 1e-6 and orders_ok and t.seconds < 30
    record.part(10, ok, f"ns max {ns_max:.1e}, ode max {ode_max:.1e}, halving ratios "
                        + ", ".join(f"order {o}: {r:.0f}" for o, r in ratios.items()), t.seconds)
    assert ok


# -- 11. negative controls ---------------------------------------------------------------------

def test_c11_corrupted_structure_constant(record, tmp_path):
    doc = copy.deepcopy(DOCUMENTS["heat6"])
    doc["brackets"][0]["coeffs"]["1"] = "2"
    with pytest.raises(JacobiViolation) as info:
        load_algebra(doc)
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, _, err = run("tables", "--algebra", str(path))
    ok = code == 2 and "Jacobi" in err and bool(info.value.args)
    record.part(11, ok, f"corrupted heat6 constant: JacobiViolation, exit {code}")
    assert ok
    assert jacobi_check(builtin_algebra("heat6")) == []


def test_c11_missing_representative(record):
    with Timer() as t:
        code, out, _ = run("verify-optimal-system", "--algebra", "heat6", "--drop", "g1", "--case", "i",
                           "--no-pairwise", "--format", "json")
    doc = json.loads(out)
    cov = doc["coverage"][0]
    ok = code == 1 and not doc["passed"] and cov["case"] == "i" and cov["reached"] == 0
    record.part(11, ok, f"heat6 without g1: case i reached {cov['reached']}/{cov['samples']}, exit {code}",
                t.seconds)
    assert ok
