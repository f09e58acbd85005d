"""Exact capacities, invariance notions and ergodic theorems for lower
probabilities on finite deterministic systems."""

from .capacity import (
    Capacity,
    NotACapacity,
    SetFunction,
    choquet,
    choquet_upper,
    classify,
    conjugate,
    distortion,
    mobius,
    probability_capacity,
)
from .credal import CredalSet, ProbabilityWeights, core, is_exact, lower_envelope, predictive
from .dynamics import FiniteMap, birkhoff_limit, decompose, invariant_events, invariant_witness
from .ergodic import (
    HypothesisError,
    fekete_limit,
    verify_corollary_erg,
    verify_kingman,
    verify_lemma_erg,
    verify_pointwise_ergodic,
)
from .invariance import (
    implication_audit,
    is_ergodic,
    is_functionally_invariant,
    is_invariant,
    is_strongly_invariant,
)
from .process import ProcessModel, pushforward, slln_experiment, slln_finite_embedding

__version__ = "0.1.0"
