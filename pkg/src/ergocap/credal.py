"""Credal sets, lower envelopes, cores, exactness, priors and predictives."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .capacity import (
    Capacity,
    SetFunction,
    SpaceMismatch,
    choquet,
    expectation,
)
from .finite import SizeCapError, rat, to_bits
from .records import Verdict

GENERAL_CORE_MAX_N = 5
CONVEX_CORE_MAX_N = 8

_ZERO = Fraction(0)
_ONE = Fraction(1)


class ProbabilityWeights(tuple):
    """Per-point masses, nonnegative and summing to one."""

    def __new__(cls, masses: Iterable):
        w = tuple(rat(x) for x in masses)
        if not w:
            raise ValueError("empty weight vector")
        if any(x < 0 for x in w):
            raise ValueError(f"negative mass in {w}")
        if sum(w) != 1:
            raise ValueError(f"masses sum to {sum(w)}, not 1")
        return super().__new__(cls, w)

    @property
    def n(self) -> int:
        return len(self)

    def prob(self, mask: int) -> Fraction:
        return sum((x for i, x in enumerate(self) if mask >> i & 1), _ZERO)

    def expect(self, f: Sequence[Fraction]) -> Fraction:
        return expectation(self, f)

    def support(self) -> int:
        return sum(1 << i for i, x in enumerate(self) if x)

    def __repr__(self) -> str:
        return "P(" + ", ".join(str(x) for x in self) + ")"


def point_mass(n: int, i: int) -> ProbabilityWeights:
    return ProbabilityWeights(_ONE if j == i else _ZERO for j in range(n))


def uniform_on(n: int, points: Iterable[int]) -> ProbabilityWeights:
    pts = set(points)
    share = Fraction(1, len(pts))
    return ProbabilityWeights(share if j in pts else _ZERO for j in range(n))


def mixture(weights: Sequence[Fraction], measures: Sequence[ProbabilityWeights]):
    n = measures[0].n
    return ProbabilityWeights(
        sum((w * m[i] for w, m in zip(weights, measures)), _ZERO) for i in range(n)
    )


def event_probabilities(p: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """``P(A)`` for every mask ``A``, via the low-bit recurrence."""
    n = len(p)
    values = [_ZERO] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        values[mask] = values[mask ^ low] + p[low.bit_length() - 1]
    return tuple(values)


@dataclass(frozen=True)
class CredalSet:
    """A finite, duplicate-free family of probability weights on one space."""

    measures: tuple[ProbabilityWeights, ...]

    def __init__(self, measures: Iterable):
        seen: dict[ProbabilityWeights, None] = {}
        for m in measures:
            seen.setdefault(m if isinstance(m, ProbabilityWeights) else ProbabilityWeights(m))
        ms = tuple(seen)
        if not ms:
            raise ValueError("credal set must be nonempty")
        if len({m.n for m in ms}) != 1:
            raise SpaceMismatch("credal set members live on different spaces")
        object.__setattr__(self, "measures", ms)

    @property
    def n(self) -> int:
        return self.measures[0].n

    def __iter__(self):
        return iter(self.measures)

    def __len__(self) -> int:
        return len(self.measures)

    def __getitem__(self, i):
        return self.measures[i]

    def canonical(self) -> "CredalSet":
        return CredalSet(sorted(self.measures))


def lower_envelope(M: CredalSet | Iterable) -> Capacity:
    """``nu(A) = min_{P in M} P(A)``, eventwise."""
    M = M if isinstance(M, CredalSet) else CredalSet(M)
    tables = [event_probabilities(p) for p in M]
    return Capacity(M.n, [min(col) for col in zip(*tables)])


def upper_envelope(M: CredalSet | Iterable) -> Capacity:
    M = M if isinstance(M, CredalSet) else CredalSet(M)
    tables = [event_probabilities(p) for p in M]
    return Capacity(M.n, [max(col) for col in zip(*tables)])


# ---- core -------------------------------------------------------------------


@dataclass(frozen=True)
class CorePolytope:
    vertices: tuple[ProbabilityWeights, ...]
    provenance: str  # "marginal-vectors" | "enumeration"

    @property
    def empty(self) -> bool:
        return not self.vertices

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def min_prob(self, mask: int) -> Fraction:
        return min(v.prob(mask) for v in self.vertices)

    def max_prob(self, mask: int) -> Fraction:
        return max(v.prob(mask) for v in self.vertices)

    def as_credal(self) -> CredalSet:
        return CredalSet(self.vertices)


def marginal_vector(nu: SetFunction, order: Sequence[int]) -> ProbabilityWeights:
    """Allocate ``nu`` increments along ``order``."""
    x = [_ZERO] * nu.n
    prev, mask = _ZERO, 0
    for i in order:
        mask |= 1 << i
        x[i] = nu(mask) - prev
        prev = nu(mask)
    return ProbabilityWeights(x)


def marginal_vectors(nu: SetFunction) -> list[ProbabilityWeights]:
    if nu.n > CONVEX_CORE_MAX_N:
        raise SizeCapError(f"marginal-vector core capped at n <= {CONVEX_CORE_MAX_N}")
    seen: dict[ProbabilityWeights, None] = {}
    for order in permutations(range(nu.n)):
        seen.setdefault(marginal_vector(nu, order))
    return sorted(seen)


def in_core(p: Sequence[Fraction], nu: SetFunction) -> bool:
    probs = event_probabilities(p)
    return probs[nu.full] == 1 and all(a >= b for a, b in zip(probs, nu.values))


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows]
    rank, cols = 0, len(rows[0]) if rows else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                factor = rows[r][c] / pr[c]
                rows[r] = [a - factor * b for a, b in zip(rows[r], pr)]
        rank += 1
    return rank


def is_vertex(p: Sequence[Fraction], nu: SetFunction) -> bool:
    """A core point is a vertex iff its tight constraints have full rank."""
    probs = event_probabilities(p)
    n = nu.n
    tight = [
        [Fraction(mask >> i & 1) for i in range(n)]
        for mask in range(1, 1 << n)
        if probs[mask] == nu(mask)
    ]
    return bool(tight) and _rank(tight) == n


def _solve(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Exact Gauss-Jordan; ``None`` when the square system is singular."""
    n = len(a)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return None
        m[c], m[pivot] = m[pivot], m[c]
        pc = m[c][c]
        m[c] = [x / pc for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                factor = m[r][c]
                m[r] = [x - factor * y for x, y in zip(m[r], m[c])]
    return [row[n] for row in m]


def core_vertices_by_bases(nu: SetFunction) -> list[ProbabilityWeights]:
    """Vertex enumeration by intersecting constraint subsets.

    Every vertex of ``{x : x(whole) = 1, x(A) >= nu(A)}`` is the unique
    solution of the equality plus ``n - 1`` tight, independent constraints;
    solve each subset exactly and keep the feasible solutions.  Exponential,
    so this is intended for ``n <= 4`` and as a cross-check.
    """
    n, full = nu.n, nu.full
    proper = [mask for mask in range(1, full)]
    rows = {mask: [Fraction(mask >> i & 1) for i in range(n)] for mask in range(1, full + 1)}
    found: dict[ProbabilityWeights, None] = {}
    for combo in combinations(proper, n - 1):
        a = [rows[full]] + [rows[m] for m in combo]
        b = [_ONE] + [nu(m) for m in combo]
        x = _solve(a, b)
        if x is None or any(v < 0 for v in x):
            continue
        if in_core(x, nu):
            found.setdefault(ProbabilityWeights(x))
    return sorted(found)


def core_vertices_cdd(nu: SetFunction) -> list[ProbabilityWeights]:
    """Exact vertex enumeration through cddlib's rational double description."""
    import cdd

    n, full = nu.n, nu.full
    rows = []
    for mask in range(1, full):
        rows.append([-nu(mask)] + [Fraction(mask >> i & 1) for i in range(n)])
    rows.append([Fraction(-1)] + [_ONE] * n)
    mat = cdd.Matrix(rows, number_type="fraction")
    mat.lin_set = frozenset([len(rows) - 1])
    mat.rep_type = cdd.RepType.INEQUALITY
    gens = cdd.Polyhedron(mat).get_generators()
    out: dict[ProbabilityWeights, None] = {}
    for row in gens:
        if row[0] != 1:
            raise ArithmeticError("core polytope reported an unbounded direction")
        x = [Fraction(v) for v in row[1:]]
        if not in_core(x, nu):
            raise ArithmeticError(f"cdd returned a point outside the core: {x}")
        out.setdefault(ProbabilityWeights(x))
    return sorted(out)


def core(nu: Capacity, method: str | None = None) -> CorePolytope:
    """Vertices of ``core(nu) = {P : P >= nu}`` in canonical order.

    Convex capacities use marginal vectors: each is tight on a maximal chain
    of ``n`` nested events, so each is already a vertex and deduplication is
    the only reduction needed.  Other capacities (``n <= 5``) go through
    exact general enumeration (``method="cdd"`` by default, or ``"bases"``).
    """
    nu = Capacity.from_setfunction(nu)
    if method is None:
        method = "marginal" if nu.is_convex else "cdd"
    if method == "marginal":
        if not nu.is_convex:
            raise ValueError("marginal vectors give the core only for convex capacities")
        return CorePolytope(tuple(marginal_vectors(nu)), "marginal-vectors")
    if nu.n > GENERAL_CORE_MAX_N:
        raise SizeCapError(
            f"general core enumeration capped at n <= {GENERAL_CORE_MAX_N}, got n={nu.n}"
        )
    if method == "cdd":
        verts = core_vertices_cdd(nu)
    elif method == "bases":
        verts = core_vertices_by_bases(nu)
    else:
        raise ValueError(f"unknown core method {method!r}")
    return CorePolytope(tuple(verts), "enumeration")


def is_exact(nu: Capacity, polytope: CorePolytope | None = None) -> Verdict:
    """Nonempty core whose eventwise minimum recovers ``nu``.

    A "no" carries ``(event, achieved_min)``; ``event`` is ``None`` when the
    core is empty.
    """
    polytope = polytope or core(nu)
    if polytope.empty:
        return Verdict(False, (None, None), "core is empty")
    tables = [event_probabilities(v) for v in polytope]
    for mask in range(len(nu)):
        low = min(t[mask] for t in tables)
        if low != nu(mask):
            return Verdict(False, (mask, low), f"min over core at {to_bits(mask, nu.n)} is {low}")
    return Verdict(True)


# ---- priors and predictives -------------------------------------------------


@dataclass(frozen=True)
class Prior:
    """A capacity over a finite family of measures (family index = point)."""

    capacity: Capacity
    family: CredalSet

    def __post_init__(self):
        if self.capacity.n != len(self.family.measures):
            raise SpaceMismatch("prior lives on a space of a different size than the family")


def predictive(rho: Capacity | Prior, family: CredalSet | None = None) -> Capacity:
    """``nu_rho(A) = Choquet integral of P -> P(A) with respect to rho``."""
    if isinstance(rho, Prior):
        rho, family = rho.capacity, rho.family
    if family is None:
        raise TypeError("predictive needs a family")
    if rho.n != len(family.measures):
        raise SpaceMismatch(
            f"prior has {rho.n} points but the family has {len(family.measures)} measures"
        )
    tables = [event_probabilities(p) for p in family]
    return Capacity(family.n, [choquet(rho, col) for col in zip(*tables)])


def lower_probability_decomposition(rho: Capacity | Prior, family: CredalSet | None = None) -> CredalSet:
    """``{nu_pi : pi vertex of core(rho)}`` for convex ``rho``."""
    if isinstance(rho, Prior):
        rho, family = rho.capacity, rho.family
    if not rho.is_convex:
        raise ValueError("decomposition requires a convex prior")
    if rho.n != len(family.measures):
        raise SpaceMismatch("prior and family sizes differ")
    mixes = [mixture(pi, family.measures) for pi in core(rho, "marginal")]
    return CredalSet(sorted(set(mixes)))


# ---- text tables ------------------------------------------------------------


def dumps_credal(M: CredalSet | CorePolytope) -> str:
    """One measure per line, masses as ``p/q`` separated by spaces, sorted."""
    ms = sorted(M.vertices if isinstance(M, CorePolytope) else M.measures)
    return "".join(" ".join(str(x) for x in m) + "\n" for m in ms)


def loads_credal(text: str) -> CredalSet:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append(ProbabilityWeights(Fraction(t) for t in line.split()))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return CredalSet(rows)


def describe(p: ProbabilityWeights) -> str:
    return "(" + ",".join(str(x) for x in p) + ")"

