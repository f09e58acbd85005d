"""Finite measurable spaces, events as bit masks, and exact real functions.

An event on a space with ``n`` points is an ``int`` whose bit ``i`` is set
when point ``i`` belongs to the event.  Points are numbered from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

MAX_POINTS = 16

Rat = Fraction
RealFunction = tuple  # tuple[Fraction, ...], one value per point


class SizeCapError(ValueError):
    """An operation was asked to run beyond its configured size cap."""


def rat(value) -> Fraction:
    """Coerce ``value`` to an exact rational.

    Strings such as ``"3/4"`` or ``"0.25"`` and ints are accepted; floats
    are rejected because they silently carry binary rounding.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a string or Fraction")
    return Fraction(value)


def fmt_rat(q: Fraction) -> str:
    """Render as ``p/q`` (or ``p`` for integers), the on-disk format."""
    return str(q)


@dataclass(frozen=True)
class FiniteSpace:
    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_POINTS:
            raise ValueError(f"space size must be in 1..{MAX_POINTS}, got {self.n}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.n or len(set(labels)) != self.n:
                raise ValueError("labels must be distinct and one per point")
            object.__setattr__(self, "labels", labels)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def n_events(self) -> int:
        return 1 << self.n

    def events(self) -> range:
        return range(1 << self.n)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def event(points: Iterable[int]) -> int:
    mask = 0
    for p in points:
        mask |= 1 << p
    return mask


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def complement(mask: int, n: int) -> int:
    return full_mask(n) & ~mask


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def to_bits(mask: int, n: int) -> str:
    """Bit string with character ``i`` standing for point ``i``."""
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def from_bits(bits: str) -> int:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"malformed event bit string {bits!r}")
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def subsets(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def realfn(values: Sequence) -> RealFunction:
    return tuple(rat(v) for v in values)


def indicator(mask: int, n: int) -> RealFunction:
    return tuple(Fraction(mask >> i & 1) for i in range(n))


def level_event(f: Sequence[Fraction], pred) -> int:
    """Event ``{i : pred(f[i])}``."""
    return event(i for i, v in enumerate(f) if pred(v))
