import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergocap.capacity import unanimity
from ergocap.credal import CredalSet, lower_envelope
from ergocap.dynamics import FiniteMap, ergodic_measures, permutation_map
from ergocap.process import (
    Contamination,
    CredalEnvelope,
    CylinderEvent,
    DepthCapError,
    Distortion,
    IIDMeasure,
    MarkovMeasure,
    ModelError,
    PiecewisePolynomial,
    ProcessModel,
    check_finite_stationarity,
    check_shift_invariance,
    check_stationarity,
    checkpoints,
    credal_bernoulli,
    cylinder_algebra,
    distorted_bernoulli,
    distortion_bounds,
    ergodicity_certificate,
    exact_bounds,
    loads_model,
    model_convex,
    model_to_json,
    power_distortion,
    pushforward,
    sample_block,
    slln_experiment,
    slln_finite_embedding,
)

BITS = (F(0), F(1))


def cyl(*words):
    return CylinderEvent(len(words[0]), frozenset(words))


def flip_chain(start=(F(1, 2), F(1, 2)), allow=False):
    return MarkovMeasure(((F(0), F(1)), (F(1), F(0))), start, allow)


# ---- distortion functions ---------------------------------------------------


def test_power_distortion():
    g = power_distortion(2)
    assert g(F(1, 2)) == F(1, 4) and g(0) == 0 and g(1) == 1
    assert g.convex_on_grid()


def test_piecewise_validation():
    with pytest.raises(ModelError):
        PiecewisePolynomial((F(0), F(1)), ((F(0), F(1, 2)),)).validate()
    with pytest.raises(ModelError):
        # discontinuous at 1/2
        PiecewisePolynomial((F(0), F(1, 2), F(1)), ((F(0), F(1)), (F(1),))).validate()
    with pytest.raises(ModelError):
        PiecewisePolynomial((F(0), F(1)), ((F(0), F(3), F(-2)),)).validate()  # decreasing past 3/4
    concave = PiecewisePolynomial((F(0), F(1)), ((F(0), F(2), F(-1)),))
    concave.validate()
    assert not concave.convex_on_grid()
    with pytest.raises(ModelError):
        ProcessModel(BITS, (IIDMeasure((F(1, 2), F(1, 2))),), Distortion(concave, True))


def test_piecewise_json_round_trip():
    g = PiecewisePolynomial((F(0), F(1, 2), F(1)), ((F(0), F(1, 2)), (F(-1, 2), F(3, 2))))
    g.validate()
    assert PiecewisePolynomial.from_json(g.to_json()) == g


# ---- base measures ----------------------------------------------------------


def test_iid_window_probability():
    m = IIDMeasure((F(1, 4), F(3, 4)))
    assert m.window_probability(5, [(1, 1), (0, 1)]) == F(9, 16) + F(3, 16)
    assert m.ergodic


def test_markov_validation_and_ergodicity():
    with pytest.raises(ModelError):
        MarkovMeasure(((F(1, 2), F(1, 3)), (0, 1)), (F(1, 2), F(1, 2)))
    with pytest.raises(ModelError):
        flip_chain((F(1), F(0)))
    assert flip_chain().ergodic  # periodic, still ergodic
    assert not flip_chain((F(1), F(0)), allow=True).ergodic
    frozen = MarkovMeasure(((F(1), F(0)), (F(0), F(1))), (F(1, 2), F(1, 2)))
    assert not frozen.ergodic


def test_markov_window_probability():
    m = flip_chain()
    assert m.window_probability(1, [(0, 1)]) == F(1, 2)
    assert m.window_probability(1, [(0, 0)]) == 0
    nonstat = flip_chain((F(1), F(0)), allow=True)
    assert nonstat.marginal(2) == (0, 1)


# ---- cylinders --------------------------------------------------------------


def test_pushforward_examples():
    model = distorted_bernoulli()
    assert pushforward(model, cyl((1,))) == F(1, 4)
    assert pushforward(model, cyl((1, 1))) == F(1, 16)
    assert pushforward(model, cyl((0, 1), (1, 0), (1, 1))) == F(9, 16)
    credal = credal_bernoulli()
    assert pushforward(credal, cyl((1,))) == F(1, 4)
    assert pushforward(credal, cyl((0, 1), (1, 0))) == F(3, 8)


def test_cylinder_preimage_and_lift():
    C = cyl((1,))
    assert C.preimage(2) == cyl((0, 1), (1, 1))
    assert C.lift(2) == cyl((1, 0), (1, 1))


def test_depth_cap():
    model = ProcessModel(tuple(F(i) for i in range(4)), (IIDMeasure((F(1, 4),) * 4),), CredalEnvelope())
    with pytest.raises(DepthCapError):
        pushforward(model, CylinderEvent(5, frozenset({(0,) * 5})))


def test_reference_models_shift_invariant():
    for model, convex in ((distorted_bernoulli(), True), (credal_bernoulli(), False)):
        rep = check_shift_invariance(model, 3)
        assert rep.invariant and rep.coherent
        assert bool(rep.convex) == convex
    rep = check_shift_invariance(credal_bernoulli(), 3)
    a, b = rep.convex.witness
    cap = cylinder_algebra(credal_bernoulli(), 3)
    A, B = int(a[::-1], 2), int(b[::-1], 2)
    assert cap(A | B) + cap(A & B) < cap(A) + cap(B)


def test_stationarity_and_nonstationary_markov():
    model = ProcessModel(BITS, (flip_chain(),), Distortion(power_distortion(2), True))
    assert check_stationarity(model, 2)
    assert check_shift_invariance(model, 3).invariant
    bad = ProcessModel(BITS, (flip_chain((F(1), F(0)), allow=True),), Distortion(power_distortion(2), True))
    verdict = check_stationarity(bad, 2)
    assert not verdict and verdict.witness == (1, 1, "10")
    assert not check_shift_invariance(bad, 2).invariant


def test_ergodicity_routes():
    assert ergodicity_certificate(distorted_bernoulli()).route == "distortion-of-ergodic"
    assert ergodicity_certificate(credal_bernoulli()).route == "envelope-of-ergodic"
    contam = ProcessModel(BITS, (IIDMeasure((F(1, 2), F(1, 2))),), Contamination(F(1, 10)))
    assert not ergodicity_certificate(contam).certified
    frozen = MarkovMeasure(((F(1), F(0)), (F(0), F(1))), (F(1, 2), F(1, 2)))
    model = ProcessModel(BITS, (frozen,), Distortion(power_distortion(2), True))
    assert ergodicity_certificate(model).route == "base-measure-not-ergodic"


def test_model_convexity():
    assert model_convex(distorted_bernoulli())
    assert not model_convex(credal_bernoulli())
    assert model_convex(credal_bernoulli((F(1, 3),)))


# ---- exact bounds -----------------------------------------------------------


def test_reference_bounds():
    assert exact_bounds(distorted_bernoulli()) == (F(1, 4), F(3, 4))
    assert distortion_bounds(distorted_bernoulli()) == (F(1, 4), F(3, 4))
    assert exact_bounds(credal_bernoulli()) == (F(1, 4), F(3, 4))


@settings(max_examples=40)
@given(st.lists(st.integers(1, 6), min_size=2, max_size=4), st.integers(1, 3),
       st.lists(st.integers(-4, 4), min_size=4, max_size=4, unique=True))
def test_distortion_bounds_two_paths_agree(raw, power, values):
    k = len(raw)
    weights = tuple(F(r, sum(raw)) for r in raw)
    model = ProcessModel(tuple(F(v) for v in values[:k]), (IIDMeasure(weights),),
                         Distortion(power_distortion(power), True))
    assert exact_bounds(model) == distortion_bounds(model)


# ---- Monte Carlo ------------------------------------------------------------


def test_checkpoints():
    assert checkpoints(10) == [1, 2, 4, 8, 10]
    assert checkpoints(8) == [1, 2, 4, 8]


def test_sampling_is_reproducible_and_blockwise():
    model = credal_bernoulli()
    a = sample_block(model, 1, 7, 0, 20, 64)
    b = sample_block(model, 1, 7, 0, 20, 64)
    assert np.array_equal(a, b)
    # paths do not depend on the block they were drawn in
    assert np.array_equal(sample_block(model, 1, 7, 5, 3, 64), a[5:8])
    assert not np.array_equal(sample_block(model, 1, 8, 0, 20, 64), a)


def test_markov_sampling_matches_chain():
    model = ProcessModel(BITS, (flip_chain(),), Distortion(power_distortion(2), True))
    avg = sample_block(model, 0, 3, 0, 50, 16)
    # an alternating path has running average 1/2 at every even time
    assert np.allclose(avg[:, 1:], 0.5)


def test_small_slln_run():
    rep = slln_experiment(distorted_bernoulli(), T=2000, paths=300, seed=1)
    assert rep.passed and rep.hypotheses_ok and not rep.labels
    again = slln_experiment(distorted_bernoulli(), T=2000, paths=300, seed=1)
    assert rep.summary() == again.summary()
    assert list(rep.csv_rows())[:2] == list(again.csv_rows())[:2]
    credal = slln_experiment(credal_bernoulli(), T=2000, paths=300, seed=1)
    assert "hypothesis-incomplete" in credal.labels


def test_slln_labels_vacuous_run():
    bad = ProcessModel(BITS, (flip_chain((F(1), F(0)), allow=True),), Distortion(power_distortion(2), True))
    rep = slln_experiment(bad, T=64, paths=10)
    assert "vacuous-run" in rep.labels and "bounds-only" in rep.labels


# ---- finite embedding -------------------------------------------------------


def test_finite_embedding_transient():
    rep = slln_finite_embedding(unanimity(3, [0, 1]), FiniteMap((0, 1, 0)), (1, 0, 5))
    assert (rep.lower, rep.upper) == (0, 1)
    assert rep.means == (1, 0, 1) and rep.measure == 1
    assert rep.stationary and rep.convex and rep.ergodic


def test_finite_embedding_two_cycle():
    tau = permutation_map(4, [(0, 1), (2, 3)])
    nu = lower_envelope(CredalSet(ergodic_measures(tau).ergodic))
    rep = slln_finite_embedding(nu, tau, (1, 0, 0, 0))
    assert (rep.lower, rep.upper) == (0, F(1, 2))
    assert not rep.convex and rep.ergodic
    assert rep.passed


def test_finite_stationarity_fails_off_invariance():
    tau = permutation_map(2, [(0, 1)])
    from ergocap.capacity import probability_capacity

    verdict = check_finite_stationarity(probability_capacity([1, 0]), tau, (1, 0))
    assert not verdict


# ---- model files ------------------------------------------------------------


def test_model_json_round_trip():
    for model in (distorted_bernoulli(), credal_bernoulli()):
        assert loads_model(json.dumps(model_to_json(model))) == model
    model = ProcessModel(BITS, (flip_chain((F(1), F(0)), allow=True),), Distortion(power_distortion(2), True))
    assert loads_model(json.dumps(model_to_json(model))) == model


def test_model_file_errors():
    good = model_to_json(credal_bernoulli())
    for mutate in (
        lambda d: d.update(version=2),
        lambda d: d.update(extra=1),
        lambda d: d["measures"][0].update(weights=[0.5, 0.5]),
        lambda d: d["measures"][0].update(kind="poisson"),
        lambda d: d["transform"].update(kind="mystery"),
    ):
        data = json.loads(json.dumps(good))
        mutate(data)
        with pytest.raises(ModelError):
            loads_model(json.dumps(data))
    with pytest.raises(ModelError):
        loads_model("{not json")


def test_shipped_model_files(tmp_path):
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "data"
    assert loads_model((root / "distorted-bernoulli.json").read_text()) == distorted_bernoulli()
    assert loads_model((root / "credal-bernoulli.json").read_text()) == credal_bernoulli()
