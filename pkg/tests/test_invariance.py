from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ergocap.capacity import Capacity, distortion, probability_capacity, unanimity
from ergocap.credal import CredalSet, core, lower_envelope, marginal_vector, point_mass, uniform_on
from ergocap.dynamics import FiniteMap, ergodic_measures, identity_map, is_invariant_measure, permutation_map
from ergocap.finite import event
from ergocap.generate import contamination, generate
from ergocap.instances import loads_instance
from ergocap.invariance import (
    NotErgodicMember,
    core_in_invariant,
    counterexample_bundle,
    implication_audit,
    invariance_report,
    is_ergodic,
    is_functionally_invariant,
    is_invariant,
    is_strongly_invariant,
    predictive_convexity_probe,
    robust_invariant_from,
)

import oracles
from strategies import seeds

TWO_CYCLES = permutation_map(4, [(0, 1), (2, 3)])
TRANSIENT = FiniteMap((0, 1, 0))


def square(t):
    return t * t


def distorted_uniform():
    return distortion([F(1, 4)] * 4, square)


def test_identity_leaves_everything_invariant():
    assert is_invariant(distorted_uniform(), identity_map(4))


def test_point_mass_on_two_cycle_is_not_invariant():
    verdict = is_invariant(probability_capacity([1, 0]), permutation_map(2, [(0, 1)]))
    assert not verdict and verdict.witness == event([0])


def test_distortion_separates_invariance_from_strong_invariance():
    nu = distorted_uniform()
    assert is_invariant(nu, TWO_CYCLES)
    strong = is_strongly_invariant(nu, TWO_CYCLES)
    assert not strong
    mask, side = strong.witness
    pre = TWO_CYCLES.preimage(mask)
    bar = nu.conjugate
    if side == 1:
        assert nu(mask & ~pre) != bar(pre & ~mask)
    else:
        assert nu(pre & ~mask) != bar(mask & ~pre)
    # the core witness: marginal vector along the order 0, 2, 1, 3
    v = marginal_vector(nu, [0, 2, 1, 3])
    assert v == (F(1, 16), F(5, 16), F(3, 16), F(7, 16))
    assert not is_invariant_measure(v, TWO_CYCLES)
    assert not core_in_invariant(nu, TWO_CYCLES)


def test_additive_invariant_measure_satisfies_every_notion():
    p = uniform_on(4, [0, 1])
    nu = probability_capacity(p)
    rep = invariance_report(nu, TWO_CYCLES, credal=CredalSet([p]))
    assert rep.invariant and rep.strongly_invariant and rep.functionally_invariant
    assert rep.robustly_invariant and rep.ergodic


def test_transient_envelope_is_strongly_invariant():
    nu = unanimity(3, [0, 1])
    assert nu == lower_envelope(CredalSet([point_mass(3, 0), point_mass(3, 1)]))
    assert is_strongly_invariant(nu, TRANSIENT)
    assert is_invariant(nu, TRANSIENT)


def test_functional_invariance():
    fam = CredalSet(ergodic_measures(TWO_CYCLES).ergodic)
    assert is_functionally_invariant(fam, TWO_CYCLES)
    single = permutation_map(3, [(0, 1, 2)])
    assert is_functionally_invariant(CredalSet([(F(1, 3),) * 3]), single)
    bad = point_mass(4, 0)
    verdict = is_functionally_invariant(CredalSet(list(fam) + [bad]), TWO_CYCLES)
    assert not verdict and verdict.witness == bad


def test_robust_invariant_examples():
    fam = ergodic_measures(TWO_CYCLES).ergodic
    prior, nu = robust_invariant_from(CredalSet([fam[0]]), TWO_CYCLES)
    assert nu == probability_capacity(fam[0])
    prior, nu = robust_invariant_from(CredalSet(fam), TWO_CYCLES)
    assert nu(event([0, 1])) == 0 and nu(15) == 1
    assert is_ergodic(nu, TWO_CYCLES)
    prior, nu = robust_invariant_from(CredalSet([point_mass(3, 0), point_mass(3, 1)]), TRANSIENT)
    assert [nu(e) for e in (0, event([0, 2]), event([1]), 7)] == [0, 0, 0, 1]
    with pytest.raises(NotErgodicMember):
        robust_invariant_from(CredalSet([uniform_on(4, [0, 2])]), TWO_CYCLES)


def test_ergodicity_examples():
    single = permutation_map(3, [(0, 1, 2)])
    assert is_ergodic(unanimity(3, [1]), single)
    assert is_ergodic(lower_envelope(CredalSet(ergodic_measures(TWO_CYCLES).ergodic)), TWO_CYCLES)
    eps = F(1, 5)
    nu = contamination(uniform_on(4, [0, 1]), eps)
    assert is_invariant(nu, TWO_CYCLES)
    verdict = is_ergodic(nu, TWO_CYCLES)
    assert not verdict and verdict.witness == event([0, 1])
    assert nu(event([0, 1])) == 1 - eps


@settings(max_examples=40)
@given(seeds, st.integers(2, 5))
def test_strong_invariance_iff_core_invariant(seed, n):
    for kind in ("singleton-cycle", "distortion-square", "additive", "invariant-envelope"):
        inst = generate(kind, seed, n)
        nu = inst.capacity
        if nu.is_convex:
            strong = bool(is_strongly_invariant(nu, inst.tau))
            verts = core(nu).vertices
            in_I = all(oracles.pushforward(inst.tau.images, v) == list(v) for v in verts)
            assert strong == in_I


@settings(max_examples=30)
@given(seeds, st.integers(2, 5))
def test_audit_has_no_violations(seed, n):
    for kind in ("invariant-envelope", "ergodic-envelope", "singleton-cycle", "additive",
                 "distortion-square", "contamination"):
        inst = generate(kind, seed, n)
        rep = implication_audit(inst.capacity, inst.tau, credal=inst.credal, instance_id=kind)
        assert not rep.violations, [ln.record() for ln in rep.violations]
        assert rep.records() == implication_audit(inst.capacity, inst.tau, credal=inst.credal,
                                                  instance_id=kind).records()


def test_audit_distortion_instance():
    rep = implication_audit(distorted_uniform(), TWO_CYCLES)
    assert rep.facts["invariant"] and rep.facts["convex"]
    assert not rep.facts["strong"] and not rep.facts["core_in_I"]
    line = next(ln for ln in rep.lines if ln.implication == "T-i-iv")
    assert line.verdict == "holds" and line.witness != "-"


def test_audit_additive_instance_all_notions_agree():
    p = uniform_on(4, [0, 1])
    rep = implication_audit(probability_capacity(p), TWO_CYCLES, credal=CredalSet([p]))
    for key in ("invariant", "strong", "functional", "core_in_I", "robust"):
        assert rep.facts[key], key


def test_counterexample_bundle_replays():
    nu = distorted_uniform()
    rep = implication_audit(nu, TWO_CYCLES)
    inst = loads_instance(counterexample_bundle(nu, TWO_CYCLES, None, rep))
    assert inst.capacity == nu and inst.tau == TWO_CYCLES


def test_audit_rejects_inconsistent_presentation():
    with pytest.raises(ValueError):
        implication_audit(Capacity(2, [0, 0, 0, 1]), identity_map(2),
                          credal=CredalSet([point_mass(2, 0)]))


def test_predictive_convexity_probe_is_a_measurement():
    probe = predictive_convexity_probe(TWO_CYCLES, "x")
    assert probe == predictive_convexity_probe(TWO_CYCLES, "x")
    assert probe.prior.capacity.is_convex
    assert probe.convex.ok == probe.predictive.is_convex
