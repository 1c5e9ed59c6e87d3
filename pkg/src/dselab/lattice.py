"""Exact geometry of directional strips in Z^q.

A strip is the set of lattice points within a fixed band around the line
through the origin with direction (1, beta_2, ..., beta_q).  Slopes and
widths are exact rationals and all band inequalities are closed, so
membership of boundary points is never ambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Union

from .errors import DimensionMismatchError, InfeasibleStripError, WidthTooSmallError

Rational = Union[Fraction, int, str]


def _frac(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def nearest_int_half_down(x: Fraction) -> int:
    """Nearest integer to x, with exact .5 ties broken toward -infinity."""
    return math.ceil(x - Fraction(1, 2))


@dataclass(frozen=True)
class Direction:
    """Direction vector (1, slopes[0], ..., slopes[q-2]) in Z^q, q >= 2."""

    q: int
    slopes: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.q < 2:
            raise DimensionMismatchError(f"direction needs q >= 2, got q={self.q}")
        if len(self.slopes) != self.q - 1:
            raise DimensionMismatchError(
                f"direction in Z^{self.q} needs {self.q - 1} slopes, got {len(self.slopes)}"
            )
        object.__setattr__(self, "slopes", tuple(_frac(s) for s in self.slopes))

    @classmethod
    def of(cls, *slopes: Rational) -> "Direction":
        return cls(q=len(slopes) + 1, slopes=tuple(_frac(s) for s in slopes))

    @property
    def slope(self) -> Fraction:
        """The single slope of a planar direction."""
        if self.q != 2:
            raise DimensionMismatchError("slope is only defined for q=2 directions")
        return self.slopes[0]


@dataclass(frozen=True)
class Strip:
    """Band around a direction: |m_i - slope_i * m_1| <= width_i / 2 for i >= 2."""

    direction: Direction
    widths: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        widths = tuple(_frac(b) for b in self.widths)
        if len(widths) != self.direction.q - 1:
            raise DimensionMismatchError(
                f"strip in Z^{self.direction.q} needs {self.direction.q - 1} widths, "
                f"got {len(widths)}"
            )
        if any(b <= 0 for b in widths):
            raise ValueError("strip widths must be positive")
        object.__setattr__(self, "widths", widths)

    @property
    def q(self) -> int:
        return self.direction.q


def make_strip(slopes: Sequence[Rational], widths: Sequence[Rational]) -> Strip:
    """Convenience constructor from slope/width lists (q = len(slopes) + 1)."""
    return Strip(Direction.of(*slopes), tuple(_frac(b) for b in widths))


@dataclass(frozen=True)
class LatticePoint:
    """A point of Z^q."""

    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def q(self) -> int:
        return len(self.coords)

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        self._check_dim(other)
        return LatticePoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "LatticePoint") -> "LatticePoint":
        self._check_dim(other)
        return LatticePoint(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def _check_dim(self, other: "LatticePoint") -> None:
        if len(self.coords) != len(other.coords):
            raise DimensionMismatchError(
                f"points of dimension {len(self.coords)} and {len(other.coords)}"
            )


def point(*coords: int) -> LatticePoint:
    return LatticePoint(tuple(coords))


@dataclass(frozen=True)
class SequenceSpec:
    """An ordered finite list of lattice points, optionally drawn from a strip.

    When a strip is given the first coordinates must be strictly monotone and
    every point must lie in the strip; free sequences carry no constraint.
    """

    points: tuple[LatticePoint, ...]
    strip: Optional[Strip] = None

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("sequence must contain at least one point")
        q = pts[0].q
        if any(p.q != q for p in pts):
            raise DimensionMismatchError("sequence mixes points of different dimensions")
        if self.strip is not None:
            if self.strip.q != q:
                raise DimensionMismatchError(
                    f"strip in Z^{self.strip.q} cannot host points of Z^{q}"
                )
            firsts = [p.coords[0] for p in pts]
            increasing = all(a < b for a, b in zip(firsts, firsts[1:]))
            decreasing = all(a > b for a, b in zip(firsts, firsts[1:]))
            if len(firsts) > 1 and not (increasing or decreasing):
                raise ValueError("first coordinates must be strictly monotone inside a strip")
            for p in pts:
                if not strip_contains(self.strip, p):
                    raise ValueError(f"point {p.coords} lies outside the declared strip")

    def __len__(self) -> int:
        return len(self.points)


def strip_contains(strip: Strip, p: LatticePoint) -> bool:
    """Exact closed-band membership test."""
    if p.q != strip.q:
        raise DimensionMismatchError(
            f"point of dimension {p.q} against strip in Z^{strip.q}"
        )
    m1 = p.coords[0]
    for slope, width, mi in zip(strip.direction.slopes, strip.widths, p.coords[1:]):
        center = slope * m1
        half = width / 2
        if not (center - half <= mi <= center + half):
            return False
    return True


def _coord_range(slope: Fraction, width: Fraction, m1: int) -> range:
    lo = slope * m1 - width / 2
    hi = slope * m1 + width / 2
    return range(math.ceil(lo), math.floor(hi) + 1)


def strip_points(strip: Strip, m_lo: int, m_hi: int) -> list[LatticePoint]:
    """All strip points with first coordinate in [m_lo, m_hi], lexicographic."""
    if m_lo > m_hi:
        raise ValueError(f"empty window: m_lo={m_lo} > m_hi={m_hi}")
    out: list[LatticePoint] = []
    for m1 in range(m_lo, m_hi + 1):
        ranges = [
            _coord_range(slope, width, m1)
            for slope, width in zip(strip.direction.slopes, strip.widths)
        ]
        for rest in product(*ranges):
            out.append(LatticePoint((m1, *rest)))
    return out


def monotone_sequence(
    strip: Strip, count: int, stride: int = 1, start_m: int = 0
) -> SequenceSpec:
    """Canonical strictly monotone sequence inside a strip.

    First coordinates are start_m, start_m + stride, ...; the remaining
    coordinates snap to the nearest integer on the strip's center line (ties
    toward -infinity).  Guaranteed to stay inside the strip whenever every
    width is >= 1; narrower strips raise when a point has no integer room.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    pts = []
    for i in range(count):
        m1 = start_m + i * stride
        coords = [m1]
        for slope, width in zip(strip.direction.slopes, strip.widths):
            center = slope * m1
            mi = nearest_int_half_down(center)
            if abs(Fraction(mi) - center) > width / 2:
                raise InfeasibleStripError(
                    f"no integer point on the strip at m1={m1} (width {width} < 1)",
                    m=m1,
                )
            coords.append(mi)
        pts.append(LatticePoint(tuple(coords)))
    return SequenceSpec(tuple(pts), strip=strip)


def _nearest_with_abs_tiebreak(x: Fraction) -> int:
    """Nearest integer to x; exact ties pick the smaller |value|, then the smaller value."""
    lo = math.floor(x)
    hi = lo + 1
    d_lo = x - lo
    d_hi = hi - x
    if d_lo < d_hi:
        return lo
    if d_hi < d_lo:
        return hi
    if abs(lo) != abs(hi):
        return lo if abs(lo) < abs(hi) else hi
    return min(lo, hi)


def min_decompose_width(v: Direction, w: Direction) -> Fraction:
    """Exclusive lower bound on the width admissible for decompose."""
    gap = abs(v.slope - w.slope)
    return 4 * (math.floor(gap) + 1)


def decompose(
    p: LatticePoint, v: Direction, w: Direction, b: Rational
) -> tuple[LatticePoint, LatticePoint]:
    """Split p = p1 + p2 with p1 in the v-strip and p2 in the w-strip of width b.

    The first coordinate of p1 is the integer division point of
    (n - slope_w * m) by (slope_v - slope_w), which forces both band
    memberships; all choices are deterministic (ties: smaller |value|, then
    smaller value; center-line rounding ties toward -infinity).
    """
    if v.q != 2 or w.q != 2 or p.q != 2:
        raise DimensionMismatchError("decompose is defined on Z^2 only")
    b = _frac(b)
    b1, b2 = v.slope, w.slope
    if b1 == b2:
        raise ValueError("directions must have distinct slopes")
    bound = min_decompose_width(v, w)
    if b <= bound:
        raise WidthTooSmallError(
            f"width {b} too small for slopes {b1}, {b2}: need b > {bound}",
            min_width=bound,
        )
    m, n = p.coords
    x = (Fraction(n) - b2 * m) / (b1 - b2)
    m1 = _nearest_with_abs_tiebreak(x)
    n1 = nearest_int_half_down(b1 * m1)
    p1 = LatticePoint((m1, n1))
    p2 = p - p1
    return p1, p2
