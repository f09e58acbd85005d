"""Exact set functions on finite spaces: capacity predicates, conjugates,
Möbius transforms and Choquet integrals.

Values are stored as a tuple indexed by event mask, so ``nu(A)`` is a plain
tuple lookup.  Continuity and continuity at the whole space hold trivially on
finite spaces; nothing here checks them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .finite import (
    FiniteSpace,
    SizeCapError,
    event,
    from_bits,
    full_mask,
    members,
    rat,
    to_bits,
)
from .records import Verdict

CONVEXITY_MAX_N = 10

_ZERO = Fraction(0)
_ONE = Fraction(1)


class InvalidSetFunction(ValueError):
    """A set function value lies outside [0, 1], or the table is malformed."""

    def __init__(self, message: str, event: int | None = None):
        super().__init__(message)
        self.event = event


class NotACapacity(ValueError):
    def __init__(self, message: str, witness):
        super().__init__(message)
        self.witness = witness


class SpaceMismatch(ValueError):
    pass


class SetFunction:
    """A [0, 1]-valued function on all events of an ``n``-point space."""

    def __init__(self, n: int, values: Sequence):
        space = FiniteSpace(n)
        if len(values) != space.n_events:
            raise InvalidSetFunction(
                f"expected {space.n_events} values for n={n}, got {len(values)}"
            )
        vals = tuple(rat(v) for v in values)
        for mask, v in enumerate(vals):
            if not 0 <= v <= 1:
                raise InvalidSetFunction(
                    f"value {v} at event {to_bits(mask, n)} is outside [0, 1]", mask
                )
        self.n = n
        self.values = vals

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], object]):
        return cls(n, [fn(mask) for mask in range(1 << n)])

    @property
    def space(self) -> FiniteSpace:
        return FiniteSpace(self.n)

    @property
    def full(self) -> int:
        return full_mask(self.n)

    def __call__(self, mask: int) -> Fraction:
        return self.values[mask]

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SetFunction):
            return NotImplemented
        return self.n == other.n and self.values == other.values

    def __hash__(self) -> int:
        return hash((self.n, self.values))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"

    def items(self):
        return enumerate(self.values)


@dataclass(frozen=True)
class ClassifyReport:
    capacity: Verdict
    convex: Verdict
    additive: Verdict

    def as_dict(self) -> dict[str, bool]:
        return {
            "capacity": self.capacity.ok,
            "convex": self.convex.ok,
            "additive": self.additive.ok,
        }


def _capacity_verdict(nu: SetFunction) -> Verdict:
    v, full = nu.values, nu.full
    if v[0] != 0:
        return Verdict(False, ("empty", 0), "nu(empty) != 0")
    if v[full] != 1:
        return Verdict(False, ("total", full), "nu(whole space) != 1")
    # Monotonicity only needs single-point extensions.
    for mask in range(full + 1):
        for i in range(nu.n):
            bit = 1 << i
            if not mask & bit and v[mask] > v[mask | bit]:
                return Verdict(False, ("monotone", (mask, mask | bit)), "not monotone")
    return Verdict(True)


def _convex_verdict(nu: SetFunction, max_n: int) -> Verdict:
    if nu.n > max_n:
        raise SizeCapError(f"convexity check capped at n <= {max_n}, got n={nu.n}")
    v, n = nu.values, nu.n
    # Supermodularity over all pairs is equivalent to the local condition
    # nu(A+i+j) + nu(A) >= nu(A+i) + nu(A+j); scan pairs only for a witness.
    violated = False
    for mask in range(1 << n):
        free = [1 << i for i in range(n) if not mask >> i & 1]
        base = v[mask]
        for bi, bj in combinations(free, 2):
            if v[mask | bi | bj] + base < v[mask | bi] + v[mask | bj]:
                violated = True
                break
        if violated:
            break
    if not violated:
        return Verdict(True)
    return Verdict(False, first_convexity_violation(nu), "supermodularity fails")


def first_convexity_violation(nu: SetFunction) -> tuple[int, int] | None:
    """Lexicographically first pair (A, B), A < B, violating supermodularity."""
    v = nu.values
    size = len(v)
    for a in range(size):
        va = v[a]
        for b in range(a + 1, size):
            meet = a & b
            if meet == a or meet == b:
                continue
            if v[a | b] + v[meet] < va + v[b]:
                return a, b
    return None


def _additive_verdict(nu: SetFunction) -> Verdict:
    v = nu.values
    if v[0] != 0:
        return Verdict(False, (0, 0), "nu(empty) != 0")
    for mask in range(1, len(v)):
        low = mask & -mask
        rest = mask ^ low
        if rest and v[mask] != v[rest] + v[low]:
            return Verdict(False, (rest, low), "additivity fails on a disjoint pair")
    return Verdict(True)


def classify(nu: SetFunction, max_n: int = CONVEXITY_MAX_N) -> ClassifyReport:
    """Decide capacity, convexity and additivity, each with a witness on "no"."""
    if not isinstance(nu, SetFunction):
        raise TypeError("classify expects a SetFunction")
    report = ClassifyReport(
        capacity=_capacity_verdict(nu),
        convex=_convex_verdict(nu, max_n),
        additive=_additive_verdict(nu),
    )
    if report.additive and not report.convex:
        raise AssertionError("additive set function reported non-convex")
    return report


class Capacity(SetFunction):
    """A capacity: ``nu(empty) = 0``, ``nu(whole) = 1``, monotone."""

    def __init__(self, n: int, values: Sequence):
        super().__init__(n, values)
        verdict = _capacity_verdict(self)
        if not verdict:
            raise NotACapacity(verdict.detail, verdict.witness)

    @classmethod
    def from_setfunction(cls, nu: SetFunction) -> "Capacity":
        return nu if isinstance(nu, Capacity) else cls(nu.n, nu.values)

    @cached_property
    def is_convex(self) -> bool:
        return _convex_verdict(self, max(CONVEXITY_MAX_N, self.n)).ok

    @cached_property
    def is_additive(self) -> bool:
        return _additive_verdict(self).ok

    @cached_property
    def mobius(self) -> tuple[Fraction, ...]:
        return mobius_transform(self.values, self.n)

    @cached_property
    def is_totally_monotone(self) -> bool:
        return all(m >= 0 for m in self.mobius)

    @cached_property
    def conjugate(self) -> "Capacity":
        full = self.full
        v = self.values
        return Capacity(self.n, [_ONE - v[full ^ mask] for mask in range(full + 1)])

    def singletons(self) -> tuple[Fraction, ...]:
        return tuple(self.values[1 << i] for i in range(self.n))


def conjugate(nu: Capacity) -> Capacity:
    """``nu_bar(A) = 1 - nu(A^c)``."""
    return Capacity.from_setfunction(nu).conjugate


def mobius_transform(values: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    """Möbius inverse ``m(A) = sum_{B <= A} (-1)^{|A - B|} nu(B)``."""
    m = list(values)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                m[mask] -= m[mask ^ bit]
    return tuple(m)


def zeta_transform(masses: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    """Inverse of :func:`mobius_transform`: ``nu(A) = sum_{B <= A} m(B)``."""
    v = list(masses)
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                v[mask] += v[mask ^ bit]
    return tuple(v)


@dataclass(frozen=True)
class MobiusTransform:
    n: int
    masses: tuple[Fraction, ...]

    def __call__(self, mask: int) -> Fraction:
        return self.masses[mask]

    @property
    def is_totally_monotone(self) -> bool:
        return all(m >= 0 for m in self.masses)

    def negative_events(self) -> list[int]:
        return [mask for mask, m in enumerate(self.masses) if m < 0]


def mobius(nu: Capacity) -> MobiusTransform:
    return MobiusTransform(nu.n, nu.mobius)


def choquet(nu: SetFunction, f: Sequence[Fraction]) -> Fraction:
    """Choquet integral of ``f`` against ``nu`` over the distinct levels of ``f``.

    With distinct values ``v_1 > ... > v_m`` and ``A_i = {f >= v_i}`` this is
    ``sum_{i<m} (v_i - v_{i+1}) nu(A_i) + v_m nu(whole)``.
    """
    if len(f) != nu.n:
        raise SpaceMismatch(f"function has {len(f)} values, space has {nu.n} points")
    by_level: dict[Fraction, int] = {}
    for i, x in enumerate(f):
        by_level[x] = by_level.get(x, 0) | (1 << i)
    levels = sorted(by_level, reverse=True)
    v = nu.values
    total = _ZERO
    mask = 0
    for hi, lo in zip(levels, levels[1:]):
        mask |= by_level[hi]
        total += (hi - lo) * v[mask]
    return total + levels[-1] * v[nu.full]


def choquet_upper(nu: Capacity, f: Sequence[Fraction]) -> Fraction:
    """Choquet integral against the conjugate; equals ``-choquet(nu, -f)``."""
    return choquet(conjugate(nu), f)


def expectation(weights: Sequence[Fraction], f: Sequence[Fraction]) -> Fraction:
    return sum((w * x for w, x in zip(weights, f)), _ZERO)


# ---- common constructions -------------------------------------------------


def probability_capacity(weights: Sequence) -> Capacity:
    w = [rat(x) for x in weights]
    n = len(w)
    values = [_ZERO] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        values[mask] = values[mask ^ low] + w[low.bit_length() - 1]
    return Capacity(n, values)


def unanimity(n: int, k: Iterable[int]) -> Capacity:
    """``u_K(A) = 1`` iff ``A`` contains ``K``."""
    kmask = event(k)
    if kmask == 0:
        raise ValueError("unanimity needs a nonempty coalition")
    return Capacity(n, [_ONE if mask & kmask == kmask else _ZERO for mask in range(1 << n)])


def vacuous(n: int) -> Capacity:
    full = full_mask(n)
    return Capacity(n, [_ONE if mask == full else _ZERO for mask in range(1 << n)])


def distortion(weights: Sequence, g: Callable[[Fraction], Fraction]) -> Capacity:
    """``g o P`` for a probability ``P`` and a distortion ``g``."""
    p = probability_capacity(weights)
    return Capacity(p.n, [rat(g(x)) for x in p.values])


def from_mobius(masses: Sequence, n: int) -> Capacity:
    return Capacity(n, zeta_transform([rat(m) for m in masses], n))


# ---- text tables ------------------------------------------------------------


def dumps_setfunction(nu: SetFunction) -> str:
    """One line per event: ``<bits> <p/q>``, events in mask order."""
    return "".join(f"{to_bits(mask, nu.n)} {v}\n" for mask, v in nu.items())


def parse_setfunction_lines(lines: Iterable[str]) -> tuple[int, list[Fraction]]:
    entries: dict[int, Fraction] = {}
    n = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidSetFunction(f"line {lineno}: expected '<bits> <value>'")
        bits, value = parts
        if n is None:
            n = len(bits)
        elif len(bits) != n:
            raise InvalidSetFunction(f"line {lineno}: event width {len(bits)} != {n}")
        mask = from_bits(bits)
        if mask in entries:
            raise InvalidSetFunction(f"line {lineno}: duplicate event {bits}", mask)
        try:
            entries[mask] = Fraction(value)
        except ValueError as exc:
            raise InvalidSetFunction(f"line {lineno}: bad value {value!r}") from exc
    if n is None:
        raise InvalidSetFunction("empty set-function table")
    if len(entries) != 1 << n:
        missing = next(m for m in range(1 << n) if m not in entries)
        raise InvalidSetFunction(
            f"table is not total: event {to_bits(missing, n)} missing", missing
        )
    return n, [entries[m] for m in range(1 << n)]


def loads_capacity(text: str) -> Capacity:
    n, values = parse_setfunction_lines(text.splitlines())
    return Capacity(n, values)


def loads_setfunction(text: str) -> SetFunction:
    n, values = parse_setfunction_lines(text.splitlines())
    return SetFunction(n, values)


def describe_event(mask: int, n: int) -> str:
    return "{" + ",".join(str(i) for i in members(mask)) + "}"
