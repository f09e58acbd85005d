"""Stationary finite-alphabet processes under capacities: cylinder
pushforwards, stationarity and shift-invariance checks, and a Monte-Carlo
strong-law harness.

Sequence space is only ever seen through cylinders of bounded depth (exact)
and through sampled paths (numpy, counter-based Philox streams).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .capacity import Capacity, choquet, choquet_upper
from .dynamics import FiniteMap, birkhoff_limit, decompose, cycle_lcm
from .finite import members, rat, to_bits
from .invariance import is_ergodic, is_invariant
from .records import Verdict
from .credal import is_exact

_ZERO, _ONE = Fraction(0), Fraction(1)

MAX_DEPTH = 8
MAX_WORDS = 256
MAX_ALGEBRA_POINTS = 10  # convexity scan on the depth-k algebra
MODEL_VERSION = 1


class ModelError(ValueError):
    """Malformed or inconsistent process model."""


class DepthCapError(ValueError):
    pass


# ---- distortion functions ---------------------------------------------------


@dataclass(frozen=True)
class PiecewisePolynomial:
    """``g(t) = sum_j c_j t^j`` on ``[breaks[i], breaks[i+1]]``, exact."""

    breaks: tuple[Fraction, ...]
    coeffs: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.coeffs) + 1 or not self.coeffs:
            raise ModelError("need one coefficient list per interval")
        if self.breaks[0] != 0 or self.breaks[-1] != 1:
            raise ModelError("pieces must cover [0, 1]")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ModelError("breakpoints must increase")

    @staticmethod
    def _poly(cs, t):
        out = _ZERO
        for c in reversed(cs):
            out = out * t + c
        return out

    def __call__(self, t) -> Fraction:
        t = rat(t)
        if not 0 <= t <= 1:
            raise ValueError(f"distortion argument {t} outside [0, 1]")
        for i, cs in enumerate(self.coeffs):
            if t <= self.breaks[i + 1]:
                return self._poly(cs, t)
        raise AssertionError("unreachable")

    def validate(self, grid: int = 256) -> None:
        """Endpoints, continuity at breaks, monotonicity on a rational grid."""
        if self(0) != 0 or self(1) != 1:
            raise ModelError("distortion must satisfy g(0) = 0 and g(1) = 1")
        for i in range(1, len(self.coeffs)):
            b = self.breaks[i]
            if self._poly(self.coeffs[i - 1], b) != self._poly(self.coeffs[i], b):
                raise ModelError(f"distortion is discontinuous at {b}")
        prev = _ZERO
        for j in range(1, grid + 1):
            cur = self(Fraction(j, grid))
            if cur < prev:
                raise ModelError(f"distortion decreases before t = {Fraction(j, grid)}")
            prev = cur

    def convex_on_grid(self, grid: int = 256) -> bool:
        """Nonnegative second differences on a rational grid."""
        vals = [self(Fraction(j, grid)) for j in range(grid + 1)]
        return all(vals[j - 1] + vals[j + 1] >= 2 * vals[j] for j in range(1, grid))

    def to_json(self):
        return [
            {"from": str(a), "to": str(b), "coeffs": [str(c) for c in cs]}
            for a, b, cs in zip(self.breaks, self.breaks[1:], self.coeffs)
        ]

    @classmethod
    def from_json(cls, pieces):
        try:
            breaks = [rat_text(pieces[0]["from"])] + [rat_text(p["to"]) for p in pieces]
            coeffs = [tuple(rat_text(c) for c in p["coeffs"]) for p in pieces]
        except (KeyError, IndexError, TypeError) as exc:
            raise ModelError(f"malformed distortion pieces: {exc}") from exc
        for a, p in zip(breaks[1:], pieces[1:]):
            if rat_text(p["from"]) != a:
                raise ModelError("distortion pieces must be contiguous")
        return cls(tuple(breaks), tuple(coeffs))


def power_distortion(k: int) -> PiecewisePolynomial:
    return PiecewisePolynomial((_ZERO, _ONE), (tuple([_ZERO] * k + [_ONE]),))


def rat_text(x) -> Fraction:
    """Model-file numbers: ints or ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError as exc:
            raise ModelError(f"bad rational {x!r}") from exc
    try:
        return rat(x)
    except (TypeError, ValueError) as exc:
        raise ModelError(str(exc)) from exc


# ---- base measures ----------------------------------------------------------


@dataclass(frozen=True)
class IIDMeasure:
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights) or sum(self.weights) != 1:
            raise ModelError("iid weights must be nonnegative and sum to 1")

    def marginal(self, n: int) -> tuple[Fraction, ...]:
        return self.weights

    def window_probability(self, start: int, words: Iterable[tuple[int, ...]]) -> Fraction:
        total = _ZERO
        for w in words:
            p = _ONE
            for s in w:
                p *= self.weights[s]
            total += p
        return total

    @property
    def ergodic(self) -> bool:
        return True

    def to_json(self):
        return {"kind": "iid", "weights": [str(w) for w in self.weights]}


@dataclass(frozen=True)
class MarkovMeasure:
    rows: tuple[tuple[Fraction, ...], ...]
    start: tuple[Fraction, ...]
    allow_nonstationary: bool = False

    def __post_init__(self):
        k = len(self.rows)
        for r in self.rows:
            if len(r) != k or any(x < 0 for x in r) or sum(r) != 1:
                raise ModelError("Markov rows must be stochastic")
        if len(self.start) != k or any(x < 0 for x in self.start) or sum(self.start) != 1:
            raise ModelError("Markov start must be a probability vector")
        if not self.allow_nonstationary and self.step(self.start) != self.start:
            raise ModelError("Markov start is not stationary for the rows")

    def step(self, p: Sequence[Fraction]) -> tuple[Fraction, ...]:
        k = len(self.rows)
        return tuple(sum((p[i] * self.rows[i][j] for i in range(k)), _ZERO) for j in range(k))

    def marginal(self, n: int) -> tuple[Fraction, ...]:
        """Law of ``x_n`` (1-based)."""
        p = self.start
        for _ in range(n - 1):
            p = self.step(p)
        return p

    def window_probability(self, start: int, words: Iterable[tuple[int, ...]]) -> Fraction:
        m = self.marginal(start)
        total = _ZERO
        for w in words:
            p = m[w[0]]
            for a, b in zip(w, w[1:]):
                p *= self.rows[a][b]
            total += p
        return total

    @property
    def ergodic(self) -> bool:
        """Stationary start whose support is one communicating class
        (periodic chains qualify: ergodic, not mixing)."""
        if self.step(self.start) != self.start:
            return False
        support = [i for i, x in enumerate(self.start) if x > 0]
        for i in support:
            seen, stack = {i}, [i]
            while stack:
                a = stack.pop()
                for b, x in enumerate(self.rows[a]):
                    if x > 0 and b not in seen:
                        seen.add(b)
                        stack.append(b)
            if not set(support) <= seen:
                return False
        return True

    def to_json(self):
        out = {
            "kind": "markov",
            "rows": [[str(x) for x in r] for r in self.rows],
            "start": [str(x) for x in self.start],
        }
        if self.allow_nonstationary:
            out["allow_nonstationary"] = True
        return out


# ---- transforms -------------------------------------------------------------


@dataclass(frozen=True)
class Distortion:
    g: PiecewisePolynomial
    convex: bool
    kind: str = "distortion"

    def apply(self, probs: Sequence[Fraction], full: bool) -> Fraction:
        return self.g(probs[0])


@dataclass(frozen=True)
class CredalEnvelope:
    kind: str = "credal"
    convex: bool = False  # not guaranteed; decided by the depth-k scan

    def apply(self, probs: Sequence[Fraction], full: bool) -> Fraction:
        return min(probs)


@dataclass(frozen=True)
class Contamination:
    """``(1 - eps) P(A)`` on proper events, 1 on the whole space."""

    epsilon: Fraction
    convex: bool = True
    kind: str = "contamination"

    def apply(self, probs: Sequence[Fraction], full: bool) -> Fraction:
        return _ONE if full else (1 - self.epsilon) * probs[0]


@dataclass(frozen=True)
class ProcessModel:
    """Alphabet values, base measures and a capacity transform.

    Distortion and contamination act on the single base measure; the credal
    transform takes the lower envelope over all of them.
    """

    alphabet: tuple[Fraction, ...]
    measures: tuple
    transform: object
    name: str = "model"

    def __post_init__(self):
        if not self.alphabet:
            raise ModelError("empty alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ModelError("alphabet values must be distinct")
        if not self.measures:
            raise ModelError("at least one base measure is required")
        k = len(self.alphabet)
        for m in self.measures:
            size = len(m.weights) if isinstance(m, IIDMeasure) else len(m.rows)
            if size != k:
                raise ModelError("base measure size differs from the alphabet")
        if self.transform.kind in ("distortion", "contamination") and len(self.measures) != 1:
            raise ModelError(f"{self.transform.kind} needs exactly one base measure")
        if isinstance(self.transform, Distortion):
            self.transform.g.validate()
            if self.transform.convex and not self.transform.g.convex_on_grid():
                raise ModelError("distortion declared convex but is not convex on the grid")
        if isinstance(self.transform, Contamination) and not 0 <= self.transform.epsilon <= 1:
            raise ModelError("epsilon must lie in [0, 1]")

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def words(self, depth: int) -> list[tuple[int, ...]]:
        return list(product(range(self.k), repeat=depth))

    def capacity_of_window(self, start: int, base: Iterable[tuple[int, ...]], depth: int) -> Fraction:
        """``nu({(x_start, ..., x_{start+depth-1}) in base})``, exactly."""
        base = set(base)
        full = len(base) == self.k ** depth
        probs = [m.window_probability(start, base) for m in self.measures]
        return self.transform.apply(probs, full)


# ---- cylinders --------------------------------------------------------------


@dataclass(frozen=True)
class CylinderEvent:
    """``{x : (x_1, ..., x_depth) in base}`` with words as symbol-index tuples."""

    depth: int
    base: frozenset

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("cylinder depth must be at least 1")
        if any(len(w) != self.depth for w in self.base):
            raise ValueError("cylinder words must have the cylinder's depth")

    def preimage(self, k: int) -> "CylinderEvent":
        """The shift preimage: prepend every symbol."""
        return CylinderEvent(self.depth + 1, frozenset((a,) + w for a in range(k) for w in self.base))

    def lift(self, k: int) -> "CylinderEvent":
        """The same event described at depth + 1."""
        return CylinderEvent(self.depth + 1, frozenset(w + (a,) for a in range(k) for w in self.base))


def _check_depth(model: ProcessModel, depth: int) -> None:
    if depth > MAX_DEPTH or model.k ** depth > MAX_WORDS:
        raise DepthCapError(f"depth {depth} exceeds the cylinder cap")


def pushforward(model: ProcessModel, C: CylinderEvent) -> Fraction:
    _check_depth(model, C.depth)
    return model.capacity_of_window(1, C.base, C.depth)


def cylinder_algebra(model: ProcessModel, depth: int) -> Capacity:
    """The pushforward on all ``2^(k^depth)`` cylinders of one depth, as a
    capacity whose points are the words in lexicographic order."""
    _check_depth(model, depth)
    words = model.words(depth)
    if len(words) > 16:
        raise DepthCapError("algebra too large to tabulate")
    vals = [model.capacity_of_window(1, [words[i] for i in members(mask)], depth)
            for mask in range(1 << len(words))]
    return Capacity(len(words), vals)


def _all_bases(model: ProcessModel, depth: int):
    words = model.words(depth)
    for mask in range(1 << len(words)):
        yield mask, [words[i] for i in members(mask)]


def check_stationarity(model: ProcessModel, depth: int, n_max: int = 4) -> Verdict:
    """Window capacities agree under an index shift for windows of length
    ``<= depth`` starting at ``1..n_max``; witness ``(n, length, base)``."""
    for length in range(1, depth + 1):
        _check_depth(model, length)
        for n in range(1, n_max + 1):
            for mask, base in _all_bases(model, length):
                a = model.capacity_of_window(n, base, length)
                b = model.capacity_of_window(n + 1, base, length)
                if a != b:
                    return Verdict(False, (n, length, to_bits(mask, model.k ** length)),
                                   f"window at {n} gives {a}, at {n + 1} gives {b}")
    return Verdict(True)


@dataclass(frozen=True)
class ShiftReport:
    invariant: Verdict
    coherent: Verdict
    convex: Verdict | None
    depth: int


def check_shift_invariance(model: ProcessModel, depth: int, convexity: bool = True) -> ShiftReport:
    """``nu_f(C) = nu_f(shift^{-1} C)`` for every cylinder of depth ``<= depth``,
    cylinder coherence across depths, and convexity on the depth algebra."""
    invariant = Verdict(True)
    coherent = Verdict(True)
    for d in range(1, depth + 1):
        _check_depth(model, d + 1)
        for mask, base in _all_bases(model, d):
            C = CylinderEvent(d, frozenset(base))
            v = pushforward(model, C)
            if invariant and v != pushforward(model, C.preimage(model.k)):
                invariant = Verdict(False, (d, to_bits(mask, model.k ** d)), "shift changes the value")
            if coherent and v != pushforward(model, C.lift(model.k)):
                coherent = Verdict(False, (d, to_bits(mask, model.k ** d)), "depth lift changes the value")
    convex = None
    if convexity and model.k ** depth <= MAX_ALGEBRA_POINTS:
        cap = cylinder_algebra(model, depth)
        if cap.is_convex:
            convex = Verdict(True)
        else:
            from .capacity import classify

            rep = classify(cap)
            a, b = rep.convex.witness
            n = cap.n
            convex = Verdict(False, (to_bits(a, n), to_bits(b, n)), "supermodularity fails")
    return ShiftReport(invariant, coherent, convex, depth)


# ---- ergodicity -------------------------------------------------------------


@dataclass(frozen=True)
class ErgodicityCertificate:
    certified: bool
    route: str


def ergodicity_certificate(model: ProcessModel) -> ErgodicityCertificate:
    """Analytic route only: distortions and finite envelopes of ergodic
    measures have {0, 1}-valued shift-invariant lattices."""
    t = model.transform
    all_ergodic = all(m.ergodic for m in model.measures)
    if t.kind == "distortion":
        if all_ergodic:
            return ErgodicityCertificate(True, "distortion-of-ergodic")
        return ErgodicityCertificate(False, "base-measure-not-ergodic")
    if t.kind == "credal":
        if all_ergodic:
            return ErgodicityCertificate(True, "envelope-of-ergodic")
        return ErgodicityCertificate(False, "member-not-ergodic")
    if t.kind == "contamination" and t.epsilon == 0 and all_ergodic:
        return ErgodicityCertificate(True, "distortion-of-ergodic")
    return ErgodicityCertificate(False, "uncertified")


# ---- exact bounds -----------------------------------------------------------


def first_coordinate_capacity(model: ProcessModel) -> Capacity:
    return Capacity(model.k, [model.capacity_of_window(1, [(i,) for i in members(mask)], 1)
                              for mask in range(1 << model.k)])


def exact_bounds(model: ProcessModel) -> tuple[Fraction, Fraction]:
    """``(int f_1 dnu, int f_1 dnu_bar)`` by depth-1 Choquet integration."""
    nu1 = first_coordinate_capacity(model)
    return choquet(nu1, model.alphabet), choquet_upper(nu1, model.alphabet)


def distortion_bounds(model: ProcessModel) -> tuple[Fraction, Fraction]:
    """Rank-dependent formula for distortion models, independent of the
    capacity table: ``L = sum_i (v_i - v_{i+1}) g(P(x >= v_i))``."""
    g = model.transform.g
    p = model.measures[0].marginal(1)
    order = sorted(range(model.k), key=lambda i: model.alphabet[i], reverse=True)
    vals = [model.alphabet[i] for i in order] + [None]
    lower = upper = vals[-2]
    tail = _ZERO
    for pos in range(model.k - 1):
        tail += p[order[pos]]
        step = vals[pos] - vals[pos + 1]
        lower += step * g(tail)
        upper += step * (1 - g(1 - tail))
    return lower, upper


# ---- Monte Carlo ------------------------------------------------------------

DEFAULT_T = 10_000
DEFAULT_PATHS = 10_000
DEFAULT_DELTA = Fraction(2, 100)
DEFAULT_DELTA_NU = Fraction(1, 100)
BLOCK = 1000


def checkpoints(T: int) -> list[int]:
    out, c = [], 1
    while c < T:
        out.append(c)
        c *= 2
    return out + [T]


def _path_uniforms(seed: int, measure_idx: int, path_idx: int, T: int) -> np.ndarray:
    ss = np.random.SeedSequence([seed, measure_idx, path_idx])
    return np.random.Generator(np.random.Philox(ss)).random(T)


def sample_block(model: ProcessModel, measure_idx: int, seed: int, first: int, count: int, T: int):
    """Running averages at the checkpoints for paths ``first..first+count-1``;
    shape ``(count, len(checkpoints(T)))``."""
    m = model.measures[measure_idx]
    values = np.array([float(v) for v in model.alphabet])
    U = np.stack([_path_uniforms(seed, measure_idx, first + j, T) for j in range(count)])
    if isinstance(m, IIDMeasure):
        cum = np.cumsum([float(w) for w in m.weights])
        cum[-1] = 1.0
        states = np.searchsorted(cum, U, side="right")
    else:
        rows = np.cumsum(np.array([[float(x) for x in r] for r in m.rows]), axis=1)
        rows[:, -1] = 1.0
        start = np.cumsum([float(x) for x in m.start])
        start[-1] = 1.0
        states = np.empty(U.shape, dtype=np.int64)
        states[:, 0] = np.searchsorted(start, U[:, 0], side="right")
        for t in range(1, T):
            thr = rows[states[:, t - 1]]
            states[:, t] = (U[:, t][:, None] >= thr).sum(axis=1)
    sums = np.cumsum(values[states], axis=1)
    cps = np.array(checkpoints(T))
    return sums[:, cps - 1] / cps


@dataclass
class MeasureRun:
    index: int
    in_bounds: int
    paths: int
    averages: np.ndarray  # (paths, checkpoints)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.in_bounds, self.paths)


@dataclass
class SLLNReport:
    model: str
    lower: Fraction
    upper: Fraction
    T: int
    paths: int
    seed: int
    delta: Fraction
    delta_nu: Fraction
    runs: list[MeasureRun]
    nu_estimate: Fraction
    stationary: Verdict
    convex: bool
    ergodic: ErgodicityCertificate
    labels: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.nu_estimate >= 1 - self.delta_nu

    @property
    def hypotheses_ok(self) -> bool:
        return bool(self.stationary) and self.convex and self.ergodic.certified

    def summary(self) -> dict:
        return {
            "model": self.model,
            "L": self.lower,
            "U": self.upper,
            "T": self.T,
            "paths": self.paths,
            "seed": self.seed,
            "delta": self.delta,
            "delta_nu": self.delta_nu,
            "fractions": [r.fraction for r in self.runs],
            "nu_estimate": self.nu_estimate,
            "verdict": "pass" if self.passed else "fail",
            "stationary": bool(self.stationary),
            "convex": self.convex,
            "ergodic": self.ergodic.certified,
            "ergodic_route": self.ergodic.route,
            "labels": self.labels or ["none"],
        }

    def csv_rows(self) -> Iterable[str]:
        cps = checkpoints(self.T)
        yield "measure,path,checkpoint,running_average"
        for run in self.runs:
            for p, row in enumerate(run.averages):
                for c, v in zip(cps, row):
                    yield f"{run.index},{p},{c},{v!r}"


def model_convex(model: ProcessModel, depth: int = 3) -> bool:
    """Convexity of the transform: declared for distortions and
    contaminations, scanned on a cylinder algebra for credal envelopes."""
    if model.transform.kind == "credal":
        if len(model.measures) == 1:
            return True
        d = depth
        while model.k ** d > MAX_ALGEBRA_POINTS:
            d -= 1
        return cylinder_algebra(model, max(d, 1)).is_convex
    return bool(model.transform.convex)


def slln_experiment(
    model: ProcessModel,
    T: int = DEFAULT_T,
    paths: int = DEFAULT_PATHS,
    seed: int = 0,
    delta: Fraction = DEFAULT_DELTA,
    delta_nu: Fraction = DEFAULT_DELTA_NU,
    stationarity_depth: int = 2,
) -> SLLNReport:
    lower, upper = exact_bounds(model)
    stationary = check_stationarity(model, stationarity_depth)
    convex = model_convex(model)
    erg = ergodicity_certificate(model)
    lo, hi = float(lower - rat(delta)), float(upper + rat(delta))
    runs = []
    for idx in range(len(model.measures)):
        blocks, inside = [], 0
        for first in range(0, paths, BLOCK):
            avg = sample_block(model, idx, seed, first, min(BLOCK, paths - first), T)
            inside += int(np.count_nonzero((avg[:, -1] >= lo) & (avg[:, -1] <= hi)))
            blocks.append(avg)
        runs.append(MeasureRun(idx, inside, paths, np.concatenate(blocks)))
    fracs = [r.fraction for r in runs]
    t = model.transform
    if t.kind == "distortion":
        est = t.g(fracs[0])
    elif t.kind == "credal":
        est = min(fracs)
    else:
        est = (1 - t.epsilon) * fracs[0]  # the bound event is never the whole space
    labels = []
    if not stationary:
        labels.append("vacuous-run")
    if not convex:
        labels.append("hypothesis-incomplete")
    if not erg.certified:
        labels.append("bounds-only")
    return SLLNReport(model.name, lower, upper, T, paths, seed, rat(delta), rat(delta_nu),
                      runs, est, stationary, convex, erg, labels)


# ---- the strong law on a finite system ---------------------------------------


@dataclass(frozen=True)
class EmbeddingCertificate:
    lower: Fraction
    upper: Fraction
    means: tuple[Fraction, ...]
    event: int
    measure: Fraction
    stationary: Verdict
    convex: bool
    ergodic: bool

    @property
    def hypotheses_ok(self) -> bool:
        return bool(self.stationary) and self.convex and self.ergodic

    @property
    def passed(self) -> bool:
        return self.measure == 1


def _window_fibers(tau: FiniteMap, f: Sequence[Fraction], start: int, length: int) -> list[int]:
    fibers: dict[tuple, int] = {}
    for w in range(tau.n):
        key = tuple(f[tau.iterate(w, start - 1 + j)] for j in range(length))
        fibers[key] = fibers.get(key, 0) | (1 << w)
    return list(fibers.values())


def check_finite_stationarity(nu: Capacity, tau: FiniteMap, f: Sequence[Fraction]) -> Verdict:
    """Window events of ``f_n = f o tau^{n-1}`` keep their capacity under an
    index shift, for all window starts and lengths that can differ on the
    space (start up to preperiod + cycle lcm, length up to its size)."""
    dec = decompose(tau)
    horizon = max(dec.preperiod) + cycle_lcm(tau) + 1
    seen = set()
    for start in range(1, horizon + 1):
        for length in range(1, tau.n + 1):
            fibers = _window_fibers(tau, f, start, length)
            for sel in range(1 << len(fibers)):
                e = 0
                for i, fb in enumerate(fibers):
                    if sel >> i & 1:
                        e |= fb
                if e in seen:
                    continue
                seen.add(e)
                if nu(e) != nu(tau.preimage(e)):
                    return Verdict(False, (start, length, to_bits(e, tau.n)),
                                   "window capacity changes under the shift")
    return Verdict(True)


def slln_finite_embedding(nu: Capacity, tau: FiniteMap, f: Sequence) -> EmbeddingCertificate:
    """``f_n = f o tau^{n-1}``: stationarity checked exactly, then the limits
    (cycle means) are compared with ``[int f dnu, int f dnu_bar]``."""
    from .ergodic import HypothesisError

    f = tuple(rat(x) for x in f)
    if not is_exact(nu):
        raise HypothesisError("strong-law", "not a lower probability")
    if not is_invariant(nu, tau):
        raise HypothesisError("strong-law", "nu is not invariant")
    stationary = check_finite_stationarity(nu, tau, f)
    lower, upper = choquet(nu, f), choquet_upper(nu, f)
    means = birkhoff_limit(tau, f)
    ev = 0
    for w, v in enumerate(means):
        if lower <= v <= upper:
            ev |= 1 << w
    return EmbeddingCertificate(lower, upper, means, ev, nu(ev), stationary,
                                nu.is_convex, bool(is_ergodic(nu, tau)))


# ---- model files ------------------------------------------------------------

_MODEL_KEYS = {"version", "name", "alphabet", "measures", "transform", "certificates"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ModelError(f"{where}: unknown field(s) {sorted(extra)}")


def model_from_json(data: dict) -> ProcessModel:
    if not isinstance(data, dict):
        raise ModelError("model must be a JSON object")
    _reject_unknown(data, _MODEL_KEYS, "model")
    if data.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model version {data.get('version')!r}")
    alphabet = tuple(rat_text(a) for a in data.get("alphabet", []))
    measures = []
    for i, m in enumerate(data.get("measures", [])):
        kind = m.get("kind")
        if kind == "iid":
            _reject_unknown(m, {"kind", "weights"}, f"measures[{i}]")
            measures.append(IIDMeasure(tuple(rat_text(w) for w in m["weights"])))
        elif kind == "markov":
            _reject_unknown(m, {"kind", "rows", "start", "allow_nonstationary"}, f"measures[{i}]")
            measures.append(MarkovMeasure(
                tuple(tuple(rat_text(x) for x in r) for r in m["rows"]),
                tuple(rat_text(x) for x in m["start"]),
                bool(m.get("allow_nonstationary", False)),
            ))
        else:
            raise ModelError(f"measures[{i}]: unknown kind {kind!r}")
    t = data.get("transform", {})
    kind = t.get("kind")
    if kind == "distortion":
        _reject_unknown(t, {"kind", "pieces", "convex"}, "transform")
        transform = Distortion(PiecewisePolynomial.from_json(t["pieces"]), bool(t.get("convex", False)))
    elif kind == "credal":
        _reject_unknown(t, {"kind"}, "transform")
        transform = CredalEnvelope()
    elif kind == "contamination":
        _reject_unknown(t, {"kind", "epsilon"}, "transform")
        transform = Contamination(rat_text(t["epsilon"]))
    else:
        raise ModelError(f"transform: unknown kind {kind!r}")
    return ProcessModel(alphabet, tuple(measures), transform, str(data.get("name", "model")))


def model_to_json(model: ProcessModel) -> dict:
    t = model.transform
    if t.kind == "distortion":
        tj = {"kind": "distortion", "pieces": t.g.to_json(), "convex": t.convex}
    elif t.kind == "credal":
        tj = {"kind": "credal"}
    else:
        tj = {"kind": "contamination", "epsilon": str(t.epsilon)}
    return {
        "version": MODEL_VERSION,
        "name": model.name,
        "alphabet": [str(a) for a in model.alphabet],
        "measures": [m.to_json() for m in model.measures],
        "transform": tj,
    }


def loads_model(text: str) -> ProcessModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"line {exc.lineno}: {exc.msg}") from exc
    return model_from_json(data)


def distorted_bernoulli(p=Fraction(1, 2), power: int = 2) -> ProcessModel:
    return ProcessModel((_ZERO, _ONE), (IIDMeasure((1 - rat(p), rat(p))),),
                        Distortion(power_distortion(power), power >= 1), "distorted-bernoulli")


def credal_bernoulli(ps=(Fraction(1, 4), Fraction(3, 4))) -> ProcessModel:
    return ProcessModel((_ZERO, _ONE), tuple(IIDMeasure((1 - rat(p), rat(p))) for p in ps),
                        CredalEnvelope(), "credal-bernoulli")
