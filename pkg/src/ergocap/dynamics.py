"""Finite transformations: functional-graph structure, invariant events and
measures, time averages, and Cesàro invariant witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

from .capacity import expectation
from .credal import ProbabilityWeights, uniform_on
from .finite import full_mask, members, rat
from .records import Verdict

_ZERO = Fraction(0)


@dataclass(frozen=True)
class FiniteMap:
    """A total transition table ``tau: point -> point``."""

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(j) for j in self.images)
        n = len(images)
        if not 1 <= n <= 16:
            raise ValueError("map size must be in 1..16")
        bad = [j for j in images if not 0 <= j < n]
        if bad:
            raise ValueError(f"image {bad[0]} is not a point of a {n}-point space")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def iterate(self, i: int, k: int) -> int:
        for _ in range(k):
            i = self.images[i]
        return i

    @cached_property
    def _preimage_table(self) -> tuple[int, ...]:
        pre_point = [0] * self.n
        for u, w in enumerate(self.images):
            pre_point[w] |= 1 << u
        table = [0] * (1 << self.n)
        for mask in range(1, 1 << self.n):
            low = mask & -mask
            table[mask] = table[mask ^ low] | pre_point[low.bit_length() - 1]
        return tuple(table)

    def preimage(self, mask: int, k: int = 1) -> int:
        """``tau^{-k}(A)``."""
        table = self._preimage_table
        for _ in range(k):
            mask = table[mask]
        return mask

    def image_event(self, mask: int) -> int:
        out = 0
        for i in members(mask):
            out |= 1 << self.images[i]
        return out

    def pushforward(self, p: Sequence[Fraction]) -> tuple[Fraction, ...]:
        out = [_ZERO] * self.n
        for u, w in enumerate(self.images):
            out[w] += p[u]
        return tuple(out)

    def dumps(self) -> str:
        return "".join(f"{i} -> {j}\n" for i, j in enumerate(self.images))

    @classmethod
    def loads(cls, text: str) -> "FiniteMap":
        pairs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            left, arrow, right = line.partition("->")
            if not arrow:
                raise ValueError(f"line {lineno}: expected 'i -> j'")
            try:
                i, j = int(left), int(right)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: non-integer point") from exc
            if i in pairs:
                raise ValueError(f"line {lineno}: point {i} mapped twice")
            pairs[i] = j
        n = len(pairs)
        if sorted(pairs) != list(range(n)):
            raise ValueError("map must list every point 0..n-1 exactly once")
        return cls(tuple(pairs[i] for i in range(n)))


def identity_map(n: int) -> FiniteMap:
    return FiniteMap(tuple(range(n)))


def permutation_map(n: int, cycles: Iterable[Sequence[int]]) -> FiniteMap:
    images = list(range(n))
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            images[a] = b
    return FiniteMap(tuple(images))


# ---- functional graph -------------------------------------------------------


@dataclass(frozen=True)
class CycleDecomposition:
    components: tuple[int, ...]  # masks, ordered by smallest contained point
    cycles: tuple[tuple[int, ...], ...]  # cycle of each component, from its smallest point
    preperiod: tuple[int, ...]  # per point: steps to enter its cycle
    component_of: tuple[int, ...]  # per point: component index

    def cycle_of(self, point: int) -> tuple[int, ...]:
        return self.cycles[self.component_of[point]]

    @property
    def cycle_lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cycles)

    def on_cycle(self) -> int:
        return sum(1 << p for c in self.cycles for p in c)

    def describe(self) -> list[str]:
        out = []
        for k, (comp, cyc) in enumerate(zip(self.components, self.cycles)):
            pts = members(comp)
            pre = ",".join(f"{p}:{self.preperiod[p]}" for p in pts)
            out.append(
                f"component {k}: points={pts} cycle={list(cyc)} preperiods={pre}"
            )
        return out


def decompose(tau: FiniteMap) -> CycleDecomposition:
    n = tau.n
    # Cycle points: those reached from themselves.  Every orbit is on a cycle
    # after n steps.
    on_cycle = [False] * n
    for i in range(n):
        j = tau.iterate(i, n)
        if not on_cycle[j]:
            k = j
            while True:
                on_cycle[k] = True
                k = tau(k)
                if k == j:
                    break
    # Weak components via union-find over edges i -> tau(i).
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        a, b = find(i), find(tau(i))
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, int] = {}
    for i in range(n):
        root = find(i)
        groups[root] = groups.get(root, 0) | (1 << i)
    components = tuple(sorted(groups.values(), key=lambda m: (m & -m)))
    component_of = [0] * n
    for k, comp in enumerate(components):
        for p in members(comp):
            component_of[p] = k
    cycles = []
    for comp in components:
        start = min(p for p in members(comp) if on_cycle[p])
        cyc = [start]
        k = tau(start)
        while k != start:
            cyc.append(k)
            k = tau(k)
        cycles.append(tuple(cyc))
    preperiod = []
    for i in range(n):
        steps, j = 0, i
        while not on_cycle[j]:
            j = tau(j)
            steps += 1
        preperiod.append(steps)
    return CycleDecomposition(components, tuple(cycles), tuple(preperiod), tuple(component_of))


@dataclass(frozen=True)
class InvariantEventLattice:
    """Invariant events: exactly the unions of weak components."""

    n: int
    atoms: tuple[int, ...]

    def events(self) -> list[int]:
        out = []
        for sel in range(1 << len(self.atoms)):
            mask = 0
            for k, atom in enumerate(self.atoms):
                if sel >> k & 1:
                    mask |= atom
            out.append(mask)
        return sorted(out)

    def contains(self, mask: int) -> bool:
        return all(mask & a in (0, a) for a in self.atoms)

    def is_measurable(self, g: Sequence) -> bool:
        """``g`` is constant on every atom."""
        return all(len({g[p] for p in members(a)}) == 1 for a in self.atoms)

    def proper_events(self) -> list[int]:
        full = full_mask(self.n)
        return [e for e in self.events() if e not in (0, full)]


def invariant_events(tau: FiniteMap) -> InvariantEventLattice:
    return InvariantEventLattice(tau.n, decompose(tau).components)


def invariant_events_brute_force(tau: FiniteMap) -> list[int]:
    """Scan all events for ``tau^{-1}(A) = A``."""
    if tau.n > 12:
        raise ValueError("brute-force scan capped at n <= 12")
    return [mask for mask in range(1 << tau.n) if tau.preimage(mask) == mask]


# ---- invariant measures -----------------------------------------------------


def is_invariant_measure(p: Sequence[Fraction], tau: FiniteMap) -> bool:
    """Fixed-point system ``P({w}) = sum_{tau(u) = w} P({u})``."""
    return tuple(tau.pushforward(p)) == tuple(p)


@dataclass(frozen=True)
class InvariantMeasureFamily:
    """``S(I)``: one uniform-on-cycle measure per cycle.  ``I`` is their hull."""

    tau: FiniteMap
    ergodic: tuple[ProbabilityWeights, ...]

    def contains(self, p: Sequence[Fraction]) -> bool:
        return is_invariant_measure(p, self.tau)

    def is_ergodic_member(self, p: Sequence[Fraction]) -> bool:
        return p in self.ergodic


def ergodic_measures(tau: FiniteMap) -> InvariantMeasureFamily:
    dec = decompose(tau)
    return InvariantMeasureFamily(tau, tuple(uniform_on(tau.n, c) for c in dec.cycles))


def is_ergodic_measure(p: Sequence[Fraction], tau: FiniteMap) -> bool:
    if not is_invariant_measure(p, tau):
        return False
    lattice = invariant_events(tau)
    probs = [sum((p[i] for i in members(e)), _ZERO) for e in lattice.events()]
    return all(v in (0, 1) for v in probs)


# ---- time averages ----------------------------------------------------------


def birkhoff_limit(tau: FiniteMap, f: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """``f*(w)``: the mean of ``f`` over the cycle reached from ``w``."""
    dec = decompose(tau)
    means = [sum((f[p] for p in cyc), _ZERO) / len(cyc) for cyc in dec.cycles]
    return tuple(means[dec.component_of[i]] for i in range(tau.n))


def birkhoff_average(tau: FiniteMap, f: Sequence[Fraction], point: int, n: int) -> Fraction:
    """``(1/n) sum_{k=1}^{n} f(tau^{k-1}(w))``, exactly."""
    if n < 1:
        raise ValueError("n must be positive")
    total, j = _ZERO, point
    for _ in range(n):
        total += f[j]
        j = tau(j)
    return total / n


def convergence_bound(tau: FiniteMap, f: Sequence[Fraction], point: int, n: int) -> Fraction:
    """Bound on ``|average_n(w) - f*(w)|``.

    The first ``preperiod`` terms and the incomplete final lap around the
    cycle each deviate from ``f*`` by at most ``2 lam`` per term, where
    ``lam = max |f|``.
    """
    dec = decompose(tau)
    lam = max(abs(x) for x in f)
    steps = dec.preperiod[point] + len(dec.cycle_of(point)) - 1
    return 2 * lam * steps / Fraction(n)


def cycle_kernel(tau: FiniteMap) -> tuple[ProbabilityWeights, ...]:
    """``p(., w)``: uniform on the cycle reachable from ``w``.

    Found by iterating ``tau`` ``n`` times and tracing the cycle from there,
    independently of :func:`decompose`.
    """
    out = []
    for w in range(tau.n):
        start = tau.iterate(w, tau.n)
        cyc, k = {start}, tau(start)
        while k != start:
            cyc.add(k)
            k = tau(k)
        out.append(uniform_on(tau.n, cyc))
    return tuple(out)


def conditional_expectation(tau: FiniteMap, f: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """``f_hat(w) = integral of f against p(., w)``."""
    return tuple(expectation(k, f) for k in cycle_kernel(tau))


# ---- Cesàro averages --------------------------------------------------------


def cesaro(p: Sequence[Fraction], tau: FiniteMap, n: int) -> ProbabilityWeights:
    """``P_n(A) = (1/n) sum_{k=0}^{n-1} P(tau^{-k}(A))``."""
    if n < 1:
        raise ValueError("n must be positive")
    acc = [_ZERO] * tau.n
    cur = tuple(rat(x) for x in p)
    for _ in range(n):
        for i, x in enumerate(cur):
            acc[i] += x
        cur = tau.pushforward(cur)
    return ProbabilityWeights(x / n for x in acc)


@dataclass(frozen=True)
class CesaroCertificate:
    """Pushforwards ``tau^k_* P`` repeat with ``period`` from ``start`` on.

    ``start`` is the smallest such index and ``period`` the least period, so
    ``P_n -> P_hat`` with ``|P_n(A) - P_hat(A)| <= 2 (start + period) / n``.
    """

    start: int
    period: int
    invariant: bool
    agrees_on_lattice: bool
    tail_average_matches: bool
    in_core_of_envelope: bool | None = None

    @property
    def ok(self) -> bool:
        return self.invariant and self.agrees_on_lattice and self.tail_average_matches

    def error_bound(self, n: int) -> Fraction:
        return Fraction(2 * (self.start + self.period), n)


def invariant_witness(p: Sequence[Fraction], tau: FiniteMap):
    """Closed-form Cesàro limit ``P_hat`` and its certificate.

    ``P_hat = sum over components of P(component) * uniform on its cycle``.
    """
    p = ProbabilityWeights(p)
    dec = decompose(tau)
    hat = [_ZERO] * tau.n
    for comp, cyc in zip(dec.components, dec.cycles):
        mass = p.prob(comp)
        for q in cyc:
            hat[q] += mass / len(cyc)
    hat = ProbabilityWeights(hat)

    seen: dict[tuple, int] = {}
    orbit = []
    cur = tuple(p)
    while cur not in seen:
        seen[cur] = len(orbit)
        orbit.append(cur)
        cur = tau.pushforward(cur)
    start = seen[cur]
    period = len(orbit) - start
    tail = [sum((orbit[start + j][i] for j in range(period)), _ZERO) / period for i in range(tau.n)]

    lattice = invariant_events(tau)
    cert = CesaroCertificate(
        start=start,
        period=period,
        invariant=is_invariant_measure(hat, tau),
        agrees_on_lattice=all(p.prob(e) == hat.prob(e) for e in lattice.events()),
        tail_average_matches=tuple(tail) == tuple(hat),
    )
    return hat, cert


def is_potentially_invariant(p: Sequence[Fraction], tau: FiniteMap) -> Verdict:
    """Always "yes" on finite deterministic systems; the witness is ``P_hat``."""
    hat, cert = invariant_witness(p, tau)
    return Verdict(cert.ok, (hat, cert), "" if cert.ok else "witness failed re-verification")


def cycle_lcm(tau: FiniteMap) -> int:
    return lcm(*decompose(tau).cycle_lengths)
