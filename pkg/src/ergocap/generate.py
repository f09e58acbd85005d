"""Seeded instance generators.  Every generator takes a ``random.Random`` (or
a seed) and returns objects that pass their own structural validation."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .capacity import Capacity, distortion, from_mobius, probability_capacity
from .credal import CredalSet, ProbabilityWeights, lower_envelope, mixture
from .dynamics import FiniteMap, decompose, ergodic_measures
from .finite import SizeCapError, full_mask
from .instances import Instance

MAX_GEN_POINTS = 8

KINDS = (
    "map",
    "invariant-envelope",
    "ergodic-envelope",
    "singleton-cycle",
    "additive",
    "convex",
    "convex-not-tm",
    "distortion-square",
    "contamination",
    "measure",
)


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _check_size(n: int) -> None:
    if not 1 <= n <= MAX_GEN_POINTS:
        raise SizeCapError(f"generator size {n} outside 1..{MAX_GEN_POINTS}")


def random_weights(rng: random.Random, k: int, denom: int = 12, positive: bool = True) -> list[Fraction]:
    """Random rational probability vector with small denominators."""
    low = 1 if positive else 0
    raw = [rng.randint(low, denom) for _ in range(k)]
    if sum(raw) == 0:
        raw[rng.randrange(k)] = 1
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_map(rng, n: int, fixed_bias: float = 0.5, cycles_only: bool = False) -> FiniteMap:
    """Functional graph built from random cycles plus transient trees.

    With probability ``fixed_bias`` each new cycle is a fixed point, which
    keeps fixed points plentiful by default.
    """
    rng = _rng(rng)
    _check_size(n)
    pts = list(range(n))
    rng.shuffle(pts)
    n_cyc = n if cycles_only else rng.randint(1, n)
    images = [None] * n
    i = 0
    while i < n_cyc:
        if rng.random() < fixed_bias:
            length = 1
        else:
            length = rng.randint(1, n_cyc - i)
        cyc = pts[i:i + length]
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            images[a] = b
        i += length
    for j in range(i, n):
        images[pts[j]] = pts[rng.randrange(j)]
    return FiniteMap(tuple(images))


def singleton_cycle_map(rng, n: int) -> FiniteMap:
    """Every cycle is a fixed point; the rest are transient."""
    rng = _rng(rng)
    _check_size(n)
    pts = list(range(n))
    rng.shuffle(pts)
    k = rng.randint(1, n)
    images = [None] * n
    for p in pts[:k]:
        images[p] = p
    for j in range(k, n):
        images[pts[j]] = pts[rng.randrange(j)]
    return FiniteMap(tuple(images))


def invariant_measure(rng, tau: FiniteMap, full_support: bool = False) -> ProbabilityWeights:
    rng = _rng(rng)
    fam = ergodic_measures(tau).ergodic
    return mixture(random_weights(rng, len(fam), positive=full_support), fam)


def random_measure(rng, n: int) -> ProbabilityWeights:
    return ProbabilityWeights(random_weights(_rng(rng), n, positive=False))


def invariant_credal(rng, tau: FiniteMap, size: int | None = None) -> CredalSet:
    """Random mixtures of the ergodic measures of ``tau``."""
    rng = _rng(rng)
    size = size or rng.randint(1, 3)
    return CredalSet(invariant_measure(rng, tau) for _ in range(size))


def ergodic_credal(rng, tau: FiniteMap) -> CredalSet:
    """A nonempty subset ``K`` of ``S(I)`` plus random mixtures of ``K``;
    its envelope takes only the values 0 and 1 on invariant events."""
    rng = _rng(rng)
    fam = list(ergodic_measures(tau).ergodic)
    K = rng.sample(fam, rng.randint(1, len(fam)))
    extra = [mixture(random_weights(rng, len(K)), K) for _ in range(rng.randint(0, 2))]
    return CredalSet(K + extra)


def belief_function(rng, n: int, focal: int | None = None) -> Capacity:
    """Totally monotone capacity from random nonnegative Moebius masses."""
    rng = _rng(rng)
    _check_size(n)
    full = full_mask(n)
    focal = focal or rng.randint(1, min(6, full))
    masks = [rng.randint(1, full) for _ in range(focal)]
    weights = random_weights(rng, focal)
    masses = [Fraction(0)] * (full + 1)
    for m, w in zip(masks, weights):
        masses[m] += w
    return from_mobius(masses, n)


def convex_not_totally_monotone(rng, n: int) -> Capacity:
    """Belief masses on a triangle ``{a,b,c}``'s pairs and points, minus
    ``delta`` on the triangle itself: convex, not totally monotone."""
    rng = _rng(rng)
    if n < 3:
        raise SizeCapError("need at least 3 points for a negative triple mass")
    _check_size(n)
    a, b, c = rng.sample(range(n), 3)
    tri = (1 << a) | (1 << b) | (1 << c)
    pair_mass = Fraction(rng.randint(2, 5), 20)
    delta = pair_mass / rng.randint(2, 4)
    masses = [Fraction(0)] * (1 << n)
    for x, y in ((a, b), (a, c), (b, c)):
        masses[(1 << x) | (1 << y)] += pair_mass
    masses[tri] -= delta
    rest = 1 - 3 * pair_mass + delta
    others = [m for m in (rng.randint(1, full_mask(n)) for _ in range(3)) if m != tri] or [full_mask(n) & ~tri or 1 << a]
    for m, w in zip(others, random_weights(rng, len(others))):
        masses[m] += rest * w
    return from_mobius(masses, n)


def convex_capacity(rng, n: int, totally_monotone: bool = True) -> Capacity:
    rng = _rng(rng)
    if totally_monotone or n < 3:
        return belief_function(rng, n)
    return convex_not_totally_monotone(rng, n)


def singleton_cycle_capacity(rng, tau: FiniteMap) -> Capacity:
    """``nu(A) = mu(A & F)`` with ``F`` the fixed points and ``mu`` a belief
    function on ``F``: convex and strongly invariant."""
    rng = _rng(rng)
    dec = decompose(tau)
    if any(len(c) != 1 for c in dec.cycles):
        raise ValueError("map has a cycle longer than one")
    fixed = [c[0] for c in dec.cycles]
    mu = belief_function(rng, len(fixed))

    def restrict(mask: int) -> int:
        return sum(1 << k for k, p in enumerate(fixed) if mask >> p & 1)

    return Capacity(tau.n, [mu(restrict(m)) for m in range(1 << tau.n)])


def square(t: Fraction) -> Fraction:
    return t * t


def contamination(p: Sequence[Fraction], eps: Fraction) -> Capacity:
    """``(1 - eps) P(A)`` on proper events, 1 on the whole space."""
    base = probability_capacity(p)
    full = full_mask(base.n)
    return Capacity(base.n, [v if m == full else (1 - eps) * v for m, v in base.items()])


def random_function(rng, n: int, low: int = -3, high: int = 5) -> tuple[Fraction, ...]:
    rng = _rng(rng)
    return tuple(Fraction(rng.randint(low, high), rng.choice((1, 1, 2))) for _ in range(n))


def generate(kind: str, seed: int, n: int) -> Instance:
    """One seeded instance of the named kind (map, capacity, credal, function)."""
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {', '.join(KINDS)}")
    _check_size(n)
    rng = random.Random(f"{kind}:{seed}:{n}")
    if kind == "map":
        return Instance(tau=random_map(rng, n), function=random_function(rng, n))
    if kind == "measure":
        tau = random_map(rng, n)
        return Instance(tau=tau, credal=CredalSet([random_measure(rng, n)]))
    if kind in ("convex", "convex-not-tm"):
        cap = convex_capacity(rng, n, totally_monotone=(kind == "convex"))
        return Instance(capacity=cap, function=random_function(rng, n))
    if kind == "singleton-cycle":
        tau = singleton_cycle_map(rng, n)
        return Instance(singleton_cycle_capacity(rng, tau), tau, None, random_function(rng, n))
    # contamination is only invariant when no point is transient
    tau = random_map(rng, n, cycles_only=(kind == "contamination"))
    f = random_function(rng, n)
    if kind == "invariant-envelope":
        M = invariant_credal(rng, tau)
        return Instance(lower_envelope(M), tau, M, f)
    if kind == "ergodic-envelope":
        M = ergodic_credal(rng, tau)
        return Instance(lower_envelope(M), tau, M, f)
    if kind == "additive":
        p = invariant_measure(rng, tau)
        return Instance(probability_capacity(p), tau, CredalSet([p]), f)
    if kind == "distortion-square":
        p = invariant_measure(rng, tau, full_support=True)
        return Instance(distortion(p, square), tau, None, f)
    # contamination
    p = invariant_measure(rng, tau, full_support=True)
    eps = Fraction(rng.randint(1, 4), 10)
    return Instance(contamination(p, eps), tau, None, f)


def multi_cycle_map(rng, n: int) -> FiniteMap:
    """A map with at least two cycles (``n >= 2``)."""
    rng = _rng(rng)
    while True:
        tau = random_map(rng, n)
        if len(decompose(tau).cycles) >= 2:
            return tau


__all__ = [
    "KINDS", "belief_function", "contamination", "convex_capacity",
    "convex_not_totally_monotone", "ergodic_credal", "generate", "invariant_credal",
    "invariant_measure", "multi_cycle_map", "random_function", "random_map",
    "random_measure", "random_weights", "singleton_cycle_capacity", "singleton_cycle_map",
    "square",
]
