from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from ergocap.capacity import (
    Capacity,
    InvalidSetFunction,
    NotACapacity,
    SetFunction,
    SpaceMismatch,
    choquet,
    choquet_upper,
    classify,
    conjugate,
    distortion,
    dumps_setfunction,
    from_mobius,
    loads_capacity,
    mobius,
    mobius_transform,
    probability_capacity,
    unanimity,
    vacuous,
    zeta_transform,
)
from ergocap.credal import CredalSet, lower_envelope, uniform_on, upper_envelope
from ergocap.finite import SizeCapError, event, full_mask
from ergocap.generate import convex_not_totally_monotone

import oracles
from strategies import convex_capacities, functions, monotone_capacities


def lattice_envelope():
    """nu({0,1}) = 1 and 0 on every other proper event of three points."""
    return unanimity(3, [0, 1])


# ---- classify ---------------------------------------------------------------


def test_unanimity_is_convex_not_additive():
    rep = classify(unanimity(3, [0, 1]))
    assert rep.as_dict() == {"capacity": True, "convex": True, "additive": False}


def test_min_of_two_uniforms_is_not_convex():
    nu = lower_envelope(CredalSet([uniform_on(4, [0, 1]), uniform_on(4, [2, 3])]))
    rep = classify(nu)
    assert not rep.convex
    a, b = rep.convex.witness
    assert (a, b) == (event([0, 2]), event([1, 2]))
    assert nu(a) + nu(b) == 1
    assert nu(a | b) + nu(a & b) == F(1, 2)


def test_probability_is_additive():
    rep = classify(probability_capacity([F(1, 2), F(1, 3), F(1, 6)]))
    assert rep.capacity and rep.convex and rep.additive


def test_non_monotone_set_function_gets_witness():
    sf = SetFunction(2, [0, F(1, 2), F(1, 4), F(1, 3)])
    rep = classify(sf)
    assert not rep.capacity
    assert rep.capacity.witness[0] == "total"
    sf = SetFunction(2, [0, F(1, 2), 0, F(1, 4)])
    with pytest.raises(NotACapacity):
        Capacity(2, sf.values)


def test_values_outside_unit_interval_name_the_event():
    with pytest.raises(InvalidSetFunction) as info:
        SetFunction(2, [0, F(3, 2), 0, 1])
    assert info.value.event == 1


def test_convexity_cap():
    with pytest.raises(SizeCapError):
        classify(vacuous(11))
    assert classify(vacuous(11), max_n=11).convex


@given(monotone_capacities())
def test_classify_agrees_with_brute_force(data):
    n, vals = data
    nu = Capacity(n, vals)
    rep = classify(nu)
    assert rep.convex.ok == oracles.convex_brute(vals, n)
    additive = all(vals[a | b] == vals[a] + vals[b]
                   for a in range(1 << n) for b in range(1 << n) if not a & b)
    assert rep.additive.ok == additive
    if not rep.convex:
        a, b = rep.convex.witness
        assert vals[a | b] + vals[a & b] < vals[a] + vals[b]


# ---- conjugate and Moebius --------------------------------------------------


def test_conjugate_examples():
    p = probability_capacity([F(1, 4), F(3, 4)])
    assert conjugate(p) == p
    sure = conjugate(vacuous(3))
    assert all(sure(m) == (0 if m == 0 else 1) for m in range(8))


def test_conjugate_of_envelope_is_upper_envelope():
    M = CredalSet([uniform_on(4, [0, 1]), uniform_on(4, [2, 3]), uniform_on(4, [0, 3])])
    upper = conjugate(lower_envelope(M))
    for mask in range(16):
        assert upper(mask) == max(sum(p[i] for i in range(4) if mask >> i & 1) for p in M)
    assert upper == upper_envelope(M)


def test_mobius_examples():
    m = mobius(unanimity(3, [0, 1]))
    assert [m(a) for a in range(8)] == [0, 0, 0, 1, 0, 0, 0, 0]
    p = mobius(probability_capacity([F(1, 2), F(1, 3), F(1, 6)]))
    assert [p(1), p(2), p(4)] == [F(1, 2), F(1, 3), F(1, 6)]
    assert all(p(a) == 0 for a in (3, 5, 6, 7))


def test_convex_not_totally_monotone_has_negative_mass():
    nu = convex_not_totally_monotone(11, 4)
    assert nu.is_convex
    m = mobius(nu)
    assert not m.is_totally_monotone
    assert m.negative_events()
    assert list(nu.mobius) == oracles.mobius_brute(nu.values, 4)


@given(monotone_capacities())
def test_mobius_round_trip(data):
    n, vals = data
    m = mobius_transform([F(v) for v in vals], n)
    assert list(m) == oracles.mobius_brute(vals, n)
    assert list(zeta_transform(m, n)) == list(vals)


@given(convex_capacities())
def test_totally_monotone_implies_convex(nu):
    if nu.is_totally_monotone:
        assert nu.is_convex
    assert from_mobius(nu.mobius, nu.n) == nu


# ---- Choquet ----------------------------------------------------------------


def test_choquet_trivial_cases():
    nu = lattice_envelope()
    assert choquet(nu, (F(2),) * 3) == 2
    for mask in range(8):
        f = tuple(F(mask >> i & 1) for i in range(3))
        assert choquet(nu, f) == nu(mask)
    assert choquet_upper(vacuous(3), (1, -2, 7)) == 7


def test_choquet_transient_example():
    # nu = lower envelope of the two fixed-point masses of the three-point map.
    nu = lattice_envelope()
    f = (F(1), F(0), F(5))
    assert choquet(nu, f) == 0
    assert choquet_upper(nu, f) == 1
    # the core is the segment between the two point masses
    assert min(f[0], f[1]) == 0 and max(f[0], f[1]) == 1


def test_choquet_on_additive_is_expectation():
    w = [F(1, 5), F(1, 2), F(3, 10)]
    f = (F(3), F(-1), F(2))
    p = probability_capacity(w)
    assert choquet(p, f) == choquet_upper(p, f) == sum(a * b for a, b in zip(w, f))


def test_choquet_space_mismatch():
    with pytest.raises(SpaceMismatch):
        choquet(vacuous(2), (1, 2, 3))


@given(st.data())
def test_choquet_matches_mobius_oracle(data):
    n, vals = data.draw(monotone_capacities())
    f = data.draw(functions(n))
    nu = Capacity(n, vals)
    assert choquet(nu, f) == oracles.choquet_by_mobius(vals, n, f)


@given(st.data())
def test_duality(data):
    n, vals = data.draw(monotone_capacities())
    f = data.draw(functions(n))
    nu = Capacity(n, vals)
    assert choquet_upper(nu, f) == -choquet(nu, tuple(-x for x in f))


@given(st.data())
def test_comonotonic_additivity(data):
    n, vals = data.draw(monotone_capacities())
    nu = Capacity(n, vals)
    order = data.draw(st.permutations(range(n)))
    # two functions nondecreasing along the same order are comonotone
    steps_f = data.draw(st.lists(st.fractions(0, 3, max_denominator=4), min_size=n, max_size=n))
    steps_g = data.draw(st.lists(st.fractions(0, 3, max_denominator=4), min_size=n, max_size=n))
    f, g = [F(0)] * n, [F(0)] * n
    acc_f = acc_g = F(-2)
    for pos, i in enumerate(order):
        acc_f += steps_f[pos]
        acc_g += steps_g[pos]
        f[i], g[i] = acc_f, acc_g
    s = [a + b for a, b in zip(f, g)]
    assert choquet(nu, s) == choquet(nu, f) + choquet(nu, g)


@given(convex_capacities())
def test_choquet_is_min_over_marginal_vectors(nu):
    f = tuple(F((7 * i) % 5 - 2, 1 + i % 3) for i in range(nu.n))
    verts = oracles.marginal_vectors_brute(nu.values, nu.n)
    assert choquet(nu, f) == min(oracles.expectation(p, f) for p in verts)
    assert choquet_upper(nu, f) == max(oracles.expectation(p, f) for p in verts)


def test_distortion_values():
    nu = distortion([F(1, 2), F(1, 2)], lambda t: t * t)
    assert [nu(m) for m in range(4)] == [0, F(1, 4), F(1, 4), 1]


# ---- text tables ------------------------------------------------------------


@given(monotone_capacities())
def test_text_table_round_trip(data):
    n, vals = data
    nu = Capacity(n, vals)
    text = dumps_setfunction(nu)
    assert loads_capacity(text) == nu
    assert dumps_setfunction(loads_capacity(text)) == text


def test_text_table_rejects_missing_event():
    text = "00 0\n10 1/2\n11 1\n"
    with pytest.raises(ValueError):
        loads_capacity(text)


def test_full_mask():
    assert full_mask(3) == 7
