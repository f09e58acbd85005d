from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from ergocap.capacity import mobius
from ergocap.dynamics import decompose, invariant_events, is_invariant_measure
from ergocap.finite import (
    FiniteSpace,
    SizeCapError,
    complement,
    event,
    from_bits,
    members,
    popcount,
    rat,
    subsets,
    to_bits,
)
from ergocap.generate import KINDS, generate
from ergocap.instances import InstanceError, dumps_instance, loads_instance
from ergocap.invariance import is_ergodic, is_invariant, is_strongly_invariant
from ergocap.records import Verdict, format_record, parse_record, parse_value

from strategies import seeds

# ---- finite spaces ----------------------------------------------------------


def test_rat_rejects_floats_and_bools():
    assert rat("3/4") == F(3, 4) and rat(2) == 2
    with pytest.raises(TypeError):
        rat(0.5)
    with pytest.raises(TypeError):
        rat(True)


def test_events_and_bits():
    e = event([0, 2])
    assert e == 5 and members(e) == [0, 2] and popcount(e) == 2
    assert to_bits(e, 4) == "1010" and from_bits("1010") == e
    assert complement(e, 4) == event([1, 3])
    assert sorted(subsets(e)) == [0, 1, 4, 5]
    with pytest.raises(ValueError):
        from_bits("10a")


def test_space_validation():
    assert FiniteSpace(3).full == 7
    with pytest.raises(ValueError):
        FiniteSpace(0)
    with pytest.raises(ValueError):
        FiniteSpace(2, ("a", "a"))


# ---- records ----------------------------------------------------------------


def test_record_round_trip():
    line = format_record(clause="x/1", ok=True, skip=None, value=F(-1, 3), values=[F(1, 2), 0])
    assert line == "clause=x/1 ok=yes skip=- value=-1/3 values=[1/2,0]"
    rec = parse_record(line)
    assert [parse_value(rec[k]) for k in ("ok", "skip", "value", "values")] == [
        True, None, F(-1, 3), [F(1, 2), 0]]


def test_record_rejects_spaces():
    with pytest.raises(ValueError):
        format_record(note="two words")
    with pytest.raises(ValueError):
        parse_record("novalue")


def test_verdict_truthiness():
    assert Verdict(True) and not Verdict(False, 3)


# ---- instance files ---------------------------------------------------------


@settings(max_examples=30)
@given(st.sampled_from(KINDS), seeds, st.integers(1, 5))
def test_instance_round_trip(kind, seed, n):
    if kind == "convex-not-tm" and n < 3:
        n = 3
    inst = generate(kind, seed, n)
    text = dumps_instance(inst)
    back = loads_instance(text)
    assert dumps_instance(back) == text
    assert (back.capacity, back.tau, back.function) == (inst.capacity, inst.tau, inst.function)


def test_instance_errors():
    with pytest.raises(InstanceError):
        loads_instance("version 2\n[function]\n1\n")
    with pytest.raises(InstanceError):
        loads_instance("version 1\n[mystery]\n1\n")
    with pytest.raises(InstanceError):
        loads_instance("version 1\n[function]\n1 2\n[map]\n0 -> 0\n")
    with pytest.raises(InstanceError):
        loads_instance("version 1\n1 2\n")
    with pytest.raises(InstanceError):
        loads_instance("version 1\n[function]\n1\n[function]\n2\n")


# ---- generators -------------------------------------------------------------


def test_generator_is_deterministic():
    assert generate("invariant-envelope", 3, 5) == generate("invariant-envelope", 3, 5)
    with pytest.raises(ValueError):
        generate("nonsense", 0, 3)
    with pytest.raises(SizeCapError):
        generate("map", 0, 9)


@settings(max_examples=40)
@given(seeds, st.integers(1, 6))
def test_generated_instances_have_their_structure(seed, n):
    inst = generate("invariant-envelope", seed, n)
    assert all(is_invariant_measure(p, inst.tau) for p in inst.credal)
    assert is_invariant(inst.capacity, inst.tau)

    inst = generate("ergodic-envelope", seed, n)
    assert is_ergodic(inst.capacity, inst.tau)
    assert all(inst.capacity(e) in (0, 1) for e in invariant_events(inst.tau).events())

    inst = generate("singleton-cycle", seed, n)
    assert all(len(c) == 1 for c in decompose(inst.tau).cycles)
    assert inst.capacity.is_convex and is_strongly_invariant(inst.capacity, inst.tau)

    inst = generate("distortion-square", seed, n)
    assert inst.capacity.is_convex and is_invariant(inst.capacity, inst.tau)

    inst = generate("contamination", seed, n)
    assert inst.capacity.is_convex and is_invariant(inst.capacity, inst.tau)

    if n >= 3:
        inst = generate("convex-not-tm", seed, n)
        assert inst.capacity.is_convex
        assert not mobius(inst.capacity).is_totally_monotone
