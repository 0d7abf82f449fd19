import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lieopt.adjoint import numeric_adjoint
from lieopt.equivalence import (EquivalenceQuery, ModeMismatch, SolverConfig, equivalence_solve,
                                separation_report, verify_optimal_system, witness_residual)
from lieopt.fixtures import CASES, DEFAULT_PARAMETERS, SYSTEMS, builtin_algebra
from lieopt.invariants import random_mixing
from lieopt.subalgebra import AlgebraPair, pair_from_elements, sample_constrained_pairs

FAST = SolverConfig(starts=16)


def test_identical_pair_gives_identity_witness(heat):
    p = pair_from_elements(heat, "v6", "v3")
    v = equivalence_solve(heat, EquivalenceQuery.build(heat, p, p))
    assert v.equivalent and v.start_index == 0
    assert v.eps == [0.0] * 6 and v.k == [1.0, 0.0, 0.0, 1.0] and v.residual == 0.0


def test_mode_mismatch(heat):
    p = pair_from_elements(heat, "v6", "v3")
    q = pair_from_elements(heat, "v6", "v4")
    with pytest.raises(ModeMismatch):
        EquivalenceQuery.build(heat, p, q)
    with pytest.raises(ModeMismatch):
        EquivalenceQuery.build(heat, p, p, mode="nonzero")


@pytest.mark.parametrize("algebra, index", [(a, i) for a in CASES for i in range(len(CASES[a]))])
def test_registered_witnesses_back_substitute(algebra, index):
    L = builtin_algebra(algebra)
    case = CASES[algebra][index]
    rep = {r.label: r for r in SYSTEMS[algebra]}[case.representative]
    for s in sample_constrained_pairs(L, case.constraint, 20, seed=11):
        target = rep.pair(L, case.target_parameter(s.values))
        eps, k = case.witness({n: float(x) for n, x in s.values.items()})
        q = EquivalenceQuery.build(L, s.pair, target)
        assert witness_residual(L, q, eps, k) < 1e-9


def _moved(L, p: AlgebraPair, seed: int, mode: str) -> AlgebraPair:
    rng = random.Random(seed)
    eps = [rng.uniform(-1, 1) for _ in range(L.dim)]
    k1, k2, k3, k4 = random_mixing(rng, mode, 1.5)
    A = numeric_adjoint(L).A(eps)
    a, b = np.array([float(x) for x in p.a]) @ A, np.array([float(x) for x in p.b]) @ A
    na, nb = k1 * a + k2 * b, k3 * a + k4 * b
    return AlgebraPair(tuple(Fraction(x) for x in na), tuple(Fraction(x) for x in nb))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["g'1", "g'3", "g'6"]))
def test_symmetry_and_transitivity_on_orbits(seed, label):
    L = builtin_algebra("ns4")
    rep = {r.label: r for r in SYSTEMS["ns4"]}[label]
    p = rep.pair(L, Fraction(1, 2) if rep.param else None)
    q = _moved(L, p, seed, rep.mode)
    r = _moved(L, q, seed + 1, rep.mode)
    # moved pairs are float images, closed only up to rounding, so the query is built directly
    for x, y in [(p, q), (q, p), (p, r)]:
        query = EquivalenceQuery(x, y, rep.mode)
        v = equivalence_solve(L, query, FAST)
        assert v.equivalent
        assert witness_residual(L, query, v.eps, v.k) < 1e-9


def test_distinct_representatives_are_not_equivalent(ns):
    reps = {r.label: r for r in SYSTEMS["ns4"]}
    p, q = reps["g'1"].pair(ns), reps["g'2"].pair(ns)
    v = equivalence_solve(ns, EquivalenceQuery.build(ns, p, q), FAST)
    assert v.tag == "Unknown" and v.residual > 1e-10


def test_separation_by_invariant_and_sign(heat, ns):
    case = [c for c in CASES["ns4"] if c.name == "3"][0]
    rep = {r.label: r for r in SYSTEMS["ns4"]}["g'6"]
    sep = separation_report(ns, rep.pair(ns, Fraction(0)), rep.pair(ns, Fraction(1)), case.invariants)
    assert sep.separated and "Delta3" in sep.reason
    iia = [c for c in CASES["heat6"] if c.name == "iia"][0]
    reps = {r.label: r for r in SYSTEMS["heat6"]}
    sep = separation_report(heat, reps["g2"].pair(heat), reps["g3"].pair(heat), classifiers=iia.classifiers)
    assert sep.separated and "Lambda1" in sep.reason


def test_ns_optimal_system_without_coverage(ns):
    report = verify_optimal_system(ns, SYSTEMS["ns4"], CASES["ns4"], DEFAULT_PARAMETERS["ns4"],
                                   SolverConfig(starts=16), coverage=False)
    assert report.passed
    assert all(p["status"] != "equivalent" for p in report.pairs)


def test_dropping_a_representative_fails_coverage(ns):
    system = [r for r in SYSTEMS["ns4"] if r.label != "g'1"]
    cases = [c for c in CASES["ns4"] if c.name == "1"]
    report = verify_optimal_system(ns, system, cases, DEFAULT_PARAMETERS["ns4"], FAST, samples=5)
    assert not report.passed
    assert report.coverage[0]["reached"] == 0


def test_fixed_element_reaches_outside_the_chart(heat):
    from lieopt.equivalence import solve_with_elements
    from lieopt.fixtures import fixed_elements
    p, q = pair_from_elements(heat, "v1 + v6", "v3"), pair_from_elements(heat, "-v1 + v6", "v3")
    query = EquivalenceQuery.build(heat, p, q)
    plain = equivalence_solve(heat, query, FAST)
    assert plain.tag == "Unknown"
    (z,) = fixed_elements("heat6")
    v = solve_with_elements(heat, query, FAST, elements=(z,))
    assert v.equivalent and v.component == z.label
    assert witness_residual(heat, query, v.eps, v.k, element=z) < 1e-9
    assert witness_residual(heat, query, v.eps, v.k) > 1e-6
