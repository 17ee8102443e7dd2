"""Dyadic rationals in [0, 1), standard dyadic intervals and partitions, arcs of the torus."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence

MAX_LEVEL = 4096


@total_ordering
@dataclass(frozen=True, slots=True)
class Dyadic:
    """The number numerator / 2**level, stored in lowest terms."""

    numerator: int
    level: int
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n, lev = self.numerator, self.level
        object.__setattr__(self, "_hash", hash((n, lev)))
        if lev < 0 or n < 0 or n >= (1 << lev) and not (n == 0 and lev == 0):
            raise ValueError(f"dyadic {n}/2^{lev} is not in [0,1)")
        if lev > 0 and n % 2 == 0:
            raise ValueError(f"dyadic {n}/2^{lev} is not reduced")

    def __hash__(self) -> int:
        return self._hash

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.level)

    def scaled(self, level: int) -> int:
        """Numerator over 2**level; level must be at least self.level."""
        return self.numerator << (level - self.level)

    def __lt__(self, other: Dyadic) -> bool:
        if not isinstance(other, Dyadic):
            return NotImplemented
        top = max(self.level, other.level)
        return self.scaled(top) < other.scaled(top)

    def __str__(self) -> str:
        if self.level == 0:
            return "0"
        return f"{self.numerator}/{1 << self.level}"

    def __repr__(self) -> str:
        return f"Dyadic({self})"

    @classmethod
    def from_fraction(cls, q: Fraction) -> Dyadic:
        den = q.denominator
        if den & (den - 1):
            raise ValueError(f"{q} is not dyadic")
        return normalize(q.numerator, den.bit_length() - 1)


ZERO = Dyadic(0, 0)


def normalize(numerator: int, level: int) -> Dyadic:
    if level < 0:
        raise ValueError("negative level")
    if numerator < 0 or numerator >= (1 << level):
        raise ValueError(f"{numerator}/2^{level} is outside [0,1)")
    if numerator == 0:
        return ZERO
    shift = (numerator & -numerator).bit_length() - 1
    shift = min(shift, level)
    return Dyadic(numerator >> shift, level - shift)


def mod_one(q: Fraction) -> Dyadic:
    """Reduce a dyadic fraction modulo 1."""
    return Dyadic.from_fraction(q - (q.numerator // q.denominator))


_DYADIC_RE = re.compile(r"^\s*(\d+)\s*(?:/\s*(?:(\d+)|2\^(\d+)))?\s*$")


def parse_dyadic(text: str) -> Dyadic:
    """Parse "3/8", "3/2^3", "0" or "1/2"."""
    m = _DYADIC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse dyadic {text!r}")
    num = int(m.group(1))
    if m.group(2) is not None:
        return Dyadic.from_fraction(Fraction(num, int(m.group(2))))
    if m.group(3) is not None:
        return normalize(num, int(m.group(3)))
    return normalize(num, 0)


@dataclass(frozen=True, slots=True)
class SDInterval:
    """The standard dyadic interval [left, left + 2**-level)."""

    left: Dyadic
    level: int

    def __post_init__(self):
        if self.level < self.left.level:
            raise ValueError(f"{self.left} is not aligned to level {self.level}")

    @classmethod
    def from_index(cls, index: int, level: int) -> SDInterval:
        if not 0 <= index < (1 << level):
            raise ValueError(f"index {index} out of range at level {level}")
        return cls(normalize(index, level), level)

    @property
    def index(self) -> int:
        return self.left.scaled(self.level)

    @property
    def right(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.level)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    def contains_point(self, d: Dyadic) -> bool:
        return self.left.value <= d.value < self.right

    def contains(self, other: SDInterval) -> bool:
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def overlaps(self, other: SDInterval) -> bool:
        return self.contains(other) or other.contains(self)

    def __str__(self) -> str:
        right = self.right
        rtext = "1" if right == 1 else str(Dyadic.from_fraction(right))
        return f"({self.left},{rtext})"


UNIT = SDInterval(ZERO, 0)


def halves(interval: SDInterval) -> tuple[SDInterval, SDInterval]:
    if interval.level >= MAX_LEVEL:
        raise ValueError("interval level exceeds the supported bound")
    a, n = interval.index, interval.level + 1
    return SDInterval.from_index(2 * a, n), SDInterval.from_index(2 * a + 1, n)


def is_standard(left: Fraction, right: Fraction) -> bool:
    width = right - left
    if width <= 0 or width.numerator != 1 or width.denominator & (width.denominator - 1):
        return False
    return (left / width).denominator == 1 and right <= 1 and left >= 0


def largest_sdi_at(d: Dyadic) -> SDInterval:
    return SDInterval(d, d.level)


def ell(d: Dyadic) -> int:
    return d.level


def enumerate_dyadics(max_level: int) -> list[Dyadic]:
    if max_level < 0:
        raise ValueError("max_level must be nonnegative")
    return [normalize(j, max_level) for j in range(1 << max_level)]


def dyadics_at_level(level: int) -> list[Dyadic]:
    """The dyadics d with ell(d) == level, ascending."""
    if level == 0:
        return [ZERO]
    return [Dyadic(j, level) for j in range(1, 1 << level, 2)]


@dataclass(frozen=True, slots=True)
class SDPartition:
    breakpoints: tuple[Dyadic, ...]

    def __post_init__(self):
        bps = self.breakpoints
        if not bps or bps[0] != ZERO:
            raise ValueError("partition must start at 0")
        edges = [b.value for b in bps] + [Fraction(1)]
        for lo, hi in zip(edges, edges[1:]):
            if not is_standard(lo, hi):
                raise ValueError(f"[{lo},{hi}) is not a standard dyadic interval")

    @classmethod
    def of(cls, points: Iterable[Dyadic | str]) -> SDPartition:
        pts = [parse_dyadic(p) if isinstance(p, str) else p for p in points]
        return cls(tuple(sorted(set(pts))))

    @property
    def intervals(self) -> tuple[SDInterval, ...]:
        edges = [b.value for b in self.breakpoints] + [Fraction(1)]
        out = []
        for b, lo, hi in zip(self.breakpoints, edges, edges[1:]):
            out.append(SDInterval(b, (hi - lo).denominator.bit_length() - 1))
        return tuple(out)

    def __len__(self) -> int:
        return len(self.breakpoints)

    def __str__(self) -> str:
        return "{" + ",".join(str(b) for b in self.breakpoints) + "}"


def parse_partition(text: str) -> SDPartition:
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    return SDPartition.of(p for p in body.split(",") if p.strip())


@dataclass(frozen=True, slots=True)
class DyadicArc:
    """Open arc running counterclockwise from start to end.

    start == end denotes the torus with the single point start removed.
    """

    start: Dyadic
    end: Dyadic

    @property
    def length(self) -> Fraction:
        gap = (self.end.value - self.start.value) % 1
        return gap if gap else Fraction(1)

    def offset(self, q: Fraction) -> Fraction:
        """Position of q measured along the arc from its start, in [0, 1)."""
        return (q - self.start.value) % 1

    def contains_point(self, d: Dyadic) -> bool:
        x = self.offset(d.value)
        return 0 < x < self.length

    def contains_interval(self, interval: SDInterval) -> bool:
        x = self.offset(interval.left.value)
        return x + interval.length <= self.length

    def in_boundary_set(self, d: Dyadic) -> bool:
        """d lies in the arc or is its left boundary point."""
        return self.offset(d.value) < self.length

    def __str__(self) -> str:
        return f"({self.start},{self.end})"


def parse_arc(text: str) -> DyadicArc:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"cannot parse arc {text!r}")
    parts = body[1:-1].split(",")
    if len(parts) != 2:
        raise ValueError(f"cannot parse arc {text!r}")
    end = parts[1].strip()
    return DyadicArc(parse_dyadic(parts[0]), ZERO if end == "1" else parse_dyadic(end))


def localized_sets(
    p: SDPartition, arc: DyadicArc
) -> tuple[list[SDInterval], list[Dyadic]]:
    intervals = [i for i in p.intervals if arc.contains_interval(i)]
    boundary = [d for d in p.breakpoints if arc.in_boundary_set(d)]
    return intervals, boundary


def interleave_with(seq: Sequence[int], filler: int) -> list[int]:
    out: list[int] = []
    for x in seq:
        out.extend((x, filler))
    return out
