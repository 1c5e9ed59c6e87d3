"""Skew suspension of a planar action: maps phi_{s,t} on X x [0,1)^2.

phi_{s,t}(x, u, v) moves the base point by the integer parts of (s+u, t+v)
and keeps the fractional parts as the new square coordinates; integer part
means floor, so fractional parts always land in [0, 1) (also for negative
arguments).  The time-one map of the line with slope beta is
W = phi_{1, beta}, and W^n = phi_{n, n*beta} exactly; everything is rational
so the identity is testable with zero tolerance.

Base points are finite observation contexts: a rotation base is an exact
circle coordinate, a shift base is a lazily sampled symbol configuration plus
the accumulated lattice offset.  Only measure-level checks need randomness
and they are deterministic given a seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .measure import ArcUnion, CylinderSet, MeasurableSet

_SAMPLE_BITS = 53


class SampledConfiguration:
    """Symbol configuration over the index lattice, sampled coordinate by coordinate."""

    def __init__(self, probs: Sequence[Fraction], rng: random.Random):
        self._probs = tuple(probs)
        self._rng = rng
        self._symbols: dict[tuple[int, ...], int] = {}

    def symbol_at(self, coord: tuple[int, ...]) -> int:
        got = self._symbols.get(coord)
        if got is None:
            draw = Fraction(self._rng.getrandbits(_SAMPLE_BITS), 2**_SAMPLE_BITS)
            acc = Fraction(0)
            got = len(self._probs) - 1
            for j, p in enumerate(self._probs):
                acc += p
                if draw < acc:
                    got = j
                    break
            self._symbols[coord] = got
        return got


@dataclass(frozen=True)
class RotationBase:
    x: Fraction


@dataclass(frozen=True, eq=True)
class ShiftBase:
    """A sampled configuration observed through an accumulated lattice offset.

    Two shift bases are equal when they share the same underlying
    configuration object and offset, which is exactly what the cocycle
    identity needs.
    """

    config: SampledConfiguration = field(compare=True)
    offset: tuple[int, ...] = ()


BasePoint = Union[RotationBase, ShiftBase]


@dataclass(frozen=True)
class SuspensionPoint:
    base: BasePoint
    u: Fraction
    v: Fraction

    def __post_init__(self) -> None:
        u, v = Fraction(self.u), Fraction(self.v)
        if not (0 <= u < 1 and 0 <= v < 1):
            raise ValueError(f"square coordinates ({u}, {v}) must lie in [0, 1)^2")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def _move_base(sys, base: BasePoint, w: tuple[int, int]) -> BasePoint:
    if isinstance(base, RotationBase):
        x = base.x - sys.rotation_offset(w)
        return RotationBase(x - math.floor(x))
    delta = sys.shift_vector(w)
    return ShiftBase(base.config, tuple(a + d for a, d in zip(base.offset, delta)))


def phi(sys, s, t, p: SuspensionPoint) -> SuspensionPoint:
    """The skew map phi_{s,t} with exact rational fractional parts."""
    if sys.q != 2:
        raise ValueError("the suspension is defined over planar actions (q=2)")
    s, t = Fraction(s), Fraction(t)
    k1 = math.floor(s + p.u)
    k2 = math.floor(t + p.v)
    return SuspensionPoint(
        base=_move_base(sys, p.base, (k1, k2)),
        u=s + p.u - k1,
        v=t + p.v - k2,
    )


def w_power(sys, beta, p: SuspensionPoint, n: int) -> SuspensionPoint:
    """n-fold composition of the time-one map phi_{1, beta}."""
    if n < 0:
        raise ValueError("n must be >= 0")
    beta = Fraction(beta)
    out = p
    for _ in range(n):
        out = phi(sys, 1, beta, out)
    return out


def random_point(sys, rng: random.Random) -> SuspensionPoint:
    """A sample from the product of the base measure and area measure on the square."""
    u = Fraction(rng.getrandbits(_SAMPLE_BITS), 2**_SAMPLE_BITS)
    v = Fraction(rng.getrandbits(_SAMPLE_BITS), 2**_SAMPLE_BITS)
    if sys.kind == "rotation":
        base: BasePoint = RotationBase(Fraction(rng.getrandbits(_SAMPLE_BITS), 2**_SAMPLE_BITS))
    else:
        base = ShiftBase(SampledConfiguration(sys.probs, rng), (0,) * sys.index_dim)
    return SuspensionPoint(base, u, v)


def base_in_set(sys, base: BasePoint, a: MeasurableSet) -> bool:
    """Membership of a base point in a measurable set, sampling symbols as needed."""
    if isinstance(a, ArcUnion):
        if not isinstance(base, RotationBase):
            raise ValueError("arc sets test rotation bases only")
        return any(lo <= base.x < hi for lo, hi in a.arcs)
    if isinstance(a, CylinderSet):
        if not isinstance(base, ShiftBase):
            raise ValueError("cylinder sets test shift bases only")
        if a.empty:
            return False
        for coord, symbols in a.constraints:
            shifted = tuple(c + o for c, o in zip(coord, base.offset))
            if base.config.symbol_at(shifted) not in symbols:
                return False
        return True
    raise TypeError(f"unsupported set type {type(a).__name__}")


Rect = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


@dataclass(frozen=True)
class SuspensionTestSet:
    """A product test set: base measurable set times a sub-rectangle of the square.

    Either factor may be None, meaning the full base space or the full square.
    """

    label: str
    base_set: Optional[MeasurableSet] = None
    rect: Optional[Rect] = None

    def contains(self, sys, p: SuspensionPoint) -> bool:
        if self.base_set is not None and not base_in_set(sys, p.base, self.base_set):
            return False
        if self.rect is not None:
            (ulo, uhi), (vlo, vhi) = self.rect
            if not (ulo <= p.u < uhi and vlo <= p.v < vhi):
                return False
        return True


@dataclass(frozen=True)
class SetFrequencyCheck:
    label: str
    freq_before: float
    freq_after: float
    bound: float

    @property
    def ok(self) -> bool:
        return abs(self.freq_before - self.freq_after) <= self.bound


@dataclass(frozen=True)
class SuspensionReport:
    sample_count: int
    seed: int
    beta: Fraction
    checks: tuple[SetFrequencyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def measure_preservation_check(
    sys,
    beta,
    sample_count: int,
    test_sets: Sequence[SuspensionTestSet],
    seed: int = 0,
) -> SuspensionReport:
    """Monte Carlo check that the time-one map preserves the product measure.

    Each test set's empirical frequency before and after one application of
    W must agree within 3/sqrt(sample_count); deterministic for a fixed seed.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    beta = Fraction(beta)
    rng = random.Random(seed)
    hits_before = [0] * len(test_sets)
    hits_after = [0] * len(test_sets)
    for _ in range(sample_count):
        p = random_point(sys, rng)
        moved = phi(sys, 1, beta, p)
        for i, ts in enumerate(test_sets):
            if ts.contains(sys, p):
                hits_before[i] += 1
            if ts.contains(sys, moved):
                hits_after[i] += 1
    bound = 3 / math.sqrt(sample_count)
    checks = tuple(
        SetFrequencyCheck(
            label=ts.label,
            freq_before=hits_before[i] / sample_count,
            freq_after=hits_after[i] / sample_count,
            bound=bound,
        )
        for i, ts in enumerate(test_sets)
    )
    return SuspensionReport(
        sample_count=sample_count, seed=seed, beta=beta, checks=checks
    )
