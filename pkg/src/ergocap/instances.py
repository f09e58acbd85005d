"""Instance files: a map, a capacity, an optional credal presentation and an
optional function, in one sectioned text file.

::

    version 1
    [map]
    0 -> 1
    1 -> 0
    [capacity]
    00 0
    10 1/2
    01 1/2
    11 1
    [credal]
    1/2 1/2
    [function]
    1 0
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .capacity import Capacity, dumps_setfunction, parse_setfunction_lines
from .credal import CredalSet, dumps_credal, loads_credal
from .dynamics import FiniteMap

FORMAT_VERSION = 1
SECTIONS = ("map", "capacity", "credal", "function")


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    capacity: Capacity | None = None
    tau: FiniteMap | None = None
    credal: CredalSet | None = None
    function: tuple[Fraction, ...] | None = None

    @property
    def n(self) -> int:
        for part in (self.capacity, self.tau, self.credal):
            if part is not None:
                return part.n
        if self.function is not None:
            return len(self.function)
        raise InstanceError("empty instance")


def dumps_instance(inst: Instance) -> str:
    out = [f"version {FORMAT_VERSION}\n"]
    if inst.tau is not None:
        out.append("[map]\n" + inst.tau.dumps())
    if inst.capacity is not None:
        out.append("[capacity]\n" + dumps_setfunction(inst.capacity))
    if inst.credal is not None:
        out.append("[credal]\n" + dumps_credal(inst.credal))
    if inst.function is not None:
        out.append("[function]\n" + " ".join(str(x) for x in inst.function) + "\n")
    return "".join(out)


def loads_instance(text: str) -> Instance:
    version = None
    sections: dict[str, list[str]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("version"):
            try:
                version = int(line.split()[1])
            except (IndexError, ValueError) as exc:
                raise InstanceError(f"line {lineno}: malformed version line") from exc
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in SECTIONS:
                raise InstanceError(f"line {lineno}: unknown section [{current}]")
            if current in sections:
                raise InstanceError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise InstanceError(f"line {lineno}: content before any section")
        sections[current].append(line)
    if version != FORMAT_VERSION:
        raise InstanceError(f"unsupported instance version {version!r}")
    tau = FiniteMap.loads("\n".join(sections["map"])) if "map" in sections else None
    cap = None
    if "capacity" in sections:
        n, values = parse_setfunction_lines(sections["capacity"])
        cap = Capacity(n, values)
    credal = loads_credal("\n".join(sections["credal"])) if "credal" in sections else None
    fn = None
    if "function" in sections:
        tokens = " ".join(sections["function"]).split()
        try:
            fn = tuple(Fraction(t) for t in tokens)
        except ValueError as exc:
            raise InstanceError(f"bad function value: {exc}") from exc
    inst = Instance(cap, tau, credal, fn)
    sizes = {x for x in (
        cap.n if cap else None,
        tau.n if tau else None,
        credal.n if credal else None,
        len(fn) if fn else None,
    ) if x is not None}
    if len(sizes) > 1:
        raise InstanceError(f"sections disagree on the space size: {sorted(sizes)}")
    return inst
