"""The zoo of exactly computable measure-preserving lattice actions.

* Bernoulli shifts over Z^q: the full shift on a finite alphabet with product
  measure.  Weakly mixing, so every direction carries maximal entropy; the
  positive control.
* The identity-shift product: Z^2 acts on binary sequences with the first
  generator acting trivially and the second as the (1/2, 1/2) two-sided
  shift.  Exactly one direction is degenerate.
* Rotation actions: Z^q acts on the circle by rational rotations.  Group
  rotations have discrete spectrum, so every direction is compact; the
  negative control.  Rational angles trade ergodicity for exactness, which no
  tested claim depends on.

Systems are immutable; every operation on them is pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from . import measure
from .measure import Partition, cylinder, arc_set, make_partition


class SystemKind(str, Enum):
    BERNOULLI = "bernoulli"
    IDENTITY_SHIFT = "identity_shift"
    ROTATION = "rotation"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class System:
    """A measure-preserving Z^q action with an exact measure oracle."""

    kind: SystemKind
    q: int
    probs: tuple[Fraction, ...] = ()
    angles: tuple[Fraction, ...] = ()

    @property
    def tag(self) -> str:
        if self.kind == SystemKind.ROTATION:
            params = ",".join(str(a) for a in self.angles)
        else:
            params = ",".join(str(p) for p in self.probs)
        return f"{self.kind.value}:z{self.q}:{params}"

    @property
    def alphabet_size(self) -> int:
        if self.kind == SystemKind.ROTATION:
            raise ValueError("rotation actions have no symbol alphabet")
        return len(self.probs)

    @property
    def index_dim(self) -> int:
        """Dimension of the coordinate set indexing cylinder constraints."""
        if self.kind == SystemKind.BERNOULLI:
            return self.q
        if self.kind == SystemKind.IDENTITY_SHIFT:
            return 1
        raise ValueError("rotation actions have no cylinder coordinates")

    def shift_vector(self, w: tuple[int, ...]) -> tuple[int, ...]:
        """How cylinder coordinates move under the group element w."""
        if self.kind == SystemKind.BERNOULLI:
            return w
        if self.kind == SystemKind.IDENTITY_SHIFT:
            return (w[1],)
        raise ValueError("rotation actions have no cylinder coordinates")

    def rotation_offset(self, w: tuple[int, ...]) -> Fraction:
        if self.kind != SystemKind.ROTATION:
            raise ValueError(f"system {self.tag!r} is not a rotation action")
        total = sum((wi * ai for wi, ai in zip(w, self.angles)), Fraction(0))
        return total - (total // 1)


def make_bernoulli_shift(q: int, probs: Sequence) -> System:
    """Full shift on len(probs) symbols over Z^q with product measure."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    pv = tuple(Fraction(p) for p in probs)
    if len(pv) < 2:
        raise ValueError("need at least two symbols")
    if any(p <= 0 for p in pv):
        raise ValueError(f"probabilities must be positive, got {pv}")
    if sum(pv) != 1:
        raise ValueError(f"probabilities sum to {sum(pv)}, expected 1")
    return System(SystemKind.BERNOULLI, q=q, probs=pv)


def make_identity_shift() -> System:
    """Z^2 action (m, n) -> Id^m o shift^n on binary sequences with fair measure."""
    return System(SystemKind.IDENTITY_SHIFT, q=2, probs=(Fraction(1, 2), Fraction(1, 2)))


def make_rotation_action(q: int, angles: Sequence) -> System:
    """Circle rotation action: the i-th generator rotates by angles[i]."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    av = tuple(Fraction(a) for a in angles)
    if len(av) != q:
        raise ValueError(f"need {q} angles, got {len(av)}")
    if any(not 0 <= a < 1 for a in av):
        raise ValueError(f"angles must lie in [0, 1), got {av}")
    return System(SystemKind.ROTATION, q=q, angles=av)


def time_zero_partition(sys: System) -> Partition:
    """Partition of a shift system by the symbol at the zero coordinate."""
    if sys.kind == SystemKind.ROTATION:
        raise ValueError("rotation actions have no time-zero partition; use arc_partition")
    zero = (0,) * sys.index_dim
    cells = [(str(j), cylinder(sys, {zero: j})) for j in range(sys.alphabet_size)]
    return make_partition(sys, cells)


def arc_partition(sys: System, cuts: Sequence) -> Partition:
    """Partition of the circle into arcs between consecutive cut points.

    Cuts must be strictly increasing rationals in [0, 1).  If 0 is not a cut,
    the last cell wraps around through 0.
    """
    if sys.kind != SystemKind.ROTATION:
        raise ValueError(f"system {sys.tag!r} is not a rotation action")
    cv = [Fraction(c) for c in cuts]
    if not cv:
        raise ValueError("need at least one cut")
    if any(not 0 <= c < 1 for c in cv):
        raise ValueError(f"cuts must lie in [0, 1), got {cv}")
    if any(a >= b for a, b in zip(cv, cv[1:])):
        raise ValueError(f"cuts must be strictly increasing, got {cv}")
    if len(cv) == 1:
        return make_partition(sys, [("0", measure.full_set(sys))])
    cells = []
    for i, (lo, hi) in enumerate(zip(cv, cv[1:])):
        cells.append((str(i), arc_set(sys, [(lo, hi)])))
    last = len(cv) - 1
    wrap = [(cv[-1], Fraction(1))]
    if cv[0] > 0:
        wrap.append((Fraction(0), cv[0]))
    cells.append((str(last), arc_set(sys, wrap)))
    return make_partition(sys, cells)
