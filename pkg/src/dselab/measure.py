"""Finite measurable sets, partitions and Shannon entropy over exact measures.

Two set families are supported, matching the system zoo:

* cylinder sets on a symbolic product space: finitely many coordinates, each
  restricted to a nonempty subset of the alphabet;
* finite unions of half-open arcs [a, c) on the circle [0, 1).

All set algebra and all measures are exact rationals; logarithms are the only
floating-point operation, so entropy identities hold to ~1e-15 while measure
identities hold exactly.  0*log 0 is 0 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import ForeignSetError, PartitionError
from .lattice import LatticePoint

Coord = tuple[int, ...]
Arc = tuple[Fraction, Fraction]


# --------------------------------------------------------------------------
# set types


@dataclass(frozen=True)
class CylinderSet:
    """Configurations x with x[coord] in symbols for each listed constraint.

    ``empty`` marks the empty set (e.g. the result of conflicting
    constraints); an empty set carries no constraints.
    """

    system_tag: str
    constraints: tuple[tuple[Coord, frozenset[int]], ...]
    empty: bool = False

    def constrained_coords(self) -> tuple[Coord, ...]:
        return tuple(c for c, _ in self.constraints)

    def symbols_at(self, coord: Coord, alphabet: frozenset[int]) -> frozenset[int]:
        for c, s in self.constraints:
            if c == coord:
                return s
        return alphabet


@dataclass(frozen=True)
class ArcUnion:
    """Disjoint, sorted, merged half-open arcs in [0, 1)."""

    system_tag: str
    arcs: tuple[Arc, ...]

    @property
    def empty(self) -> bool:
        return not self.arcs


MeasurableSet = Union[CylinderSet, ArcUnion]


def _check_same_system(a: MeasurableSet, b: MeasurableSet) -> None:
    if a.system_tag != b.system_tag:
        raise ForeignSetError(
            f"sets belong to different systems: {a.system_tag!r} vs {b.system_tag!r}"
        )


def _check_owned(sys, a: MeasurableSet) -> None:
    if a.system_tag != sys.tag:
        raise ForeignSetError(
            f"set tagged {a.system_tag!r} does not belong to system {sys.tag!r}"
        )


# --------------------------------------------------------------------------
# constructors


def _as_coord(sys, c) -> Coord:
    coord = (c,) if isinstance(c, int) else tuple(int(x) for x in c)
    if len(coord) != sys.index_dim:
        raise ValueError(
            f"coordinate {coord} has dimension {len(coord)}, "
            f"system indexes by Z^{sys.index_dim}"
        )
    return coord


def _as_symbols(sys, v) -> frozenset[int]:
    symbols = frozenset([v]) if isinstance(v, int) else frozenset(int(x) for x in v)
    bad = [j for j in symbols if not 0 <= j < sys.alphabet_size]
    if bad:
        raise ValueError(f"symbols {bad} outside alphabet of size {sys.alphabet_size}")
    return symbols


def _canonical_cylinder(
    tag: str, alphabet: frozenset[int], items: Iterable[tuple[Coord, frozenset[int]]]
) -> CylinderSet:
    kept = []
    for coord, symbols in items:
        if not symbols:
            return CylinderSet(tag, (), empty=True)
        if symbols != alphabet:
            kept.append((coord, symbols))
    return CylinderSet(tag, tuple(sorted(kept)))


def cylinder(sys, constraints: Mapping) -> CylinderSet:
    """Cylinder set from {coordinate: symbol or iterable of symbols}."""
    alphabet = frozenset(range(sys.alphabet_size))
    seen: dict[Coord, frozenset[int]] = {}
    for c, v in constraints.items():
        coord = _as_coord(sys, c)
        symbols = _as_symbols(sys, v)
        seen[coord] = seen[coord] & symbols if coord in seen else symbols
    return _canonical_cylinder(sys.tag, alphabet, seen.items())


def _merge_arcs(arcs: list[Arc]) -> tuple[Arc, ...]:
    arcs = sorted((lo, hi) for lo, hi in arcs if hi > lo)
    merged: list[Arc] = []
    for lo, hi in arcs:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


def arc_set(sys, arcs: Iterable[tuple]) -> ArcUnion:
    """Arc union from (lo, hi) pairs with 0 <= lo < hi <= 1."""
    if sys.kind != "rotation":
        raise ValueError(f"system {sys.tag!r} does not carry arc sets")
    norm = []
    for lo, hi in arcs:
        lo, hi = Fraction(lo), Fraction(hi)
        if not (0 <= lo < hi <= 1):
            raise ValueError(f"arc [{lo}, {hi}) must satisfy 0 <= lo < hi <= 1")
        norm.append((lo, hi))
    return ArcUnion(sys.tag, _merge_arcs(norm))


def full_set(sys) -> MeasurableSet:
    if sys.kind == "rotation":
        return ArcUnion(sys.tag, ((Fraction(0), Fraction(1)),))
    return CylinderSet(sys.tag, ())


def empty_set(sys) -> MeasurableSet:
    if sys.kind == "rotation":
        return ArcUnion(sys.tag, ())
    return CylinderSet(sys.tag, (), empty=True)


def complement(sys, a: MeasurableSet) -> MeasurableSet:
    """Complement, where it stays inside the set family.

    Arc unions always complement; a cylinder complements only when it
    constrains at most one coordinate (the complement of a multi-coordinate
    cylinder is not itself a cylinder).
    """
    _check_owned(sys, a)
    if isinstance(a, ArcUnion):
        gaps: list[Arc] = []
        cursor = Fraction(0)
        for lo, hi in a.arcs:
            if lo > cursor:
                gaps.append((cursor, lo))
            cursor = hi
        if cursor < 1:
            gaps.append((cursor, Fraction(1)))
        return ArcUnion(sys.tag, tuple(gaps))
    if a.empty:
        return full_set(sys)
    if len(a.constraints) == 0:
        return empty_set(sys)
    if len(a.constraints) > 1:
        raise ValueError(
            "complement of a cylinder with more than one constrained coordinate "
            "is not a cylinder"
        )
    alphabet = frozenset(range(sys.alphabet_size))
    coord, symbols = a.constraints[0]
    return _canonical_cylinder(sys.tag, alphabet, [(coord, alphabet - symbols)])


# --------------------------------------------------------------------------
# measure, translation, intersection


def set_measure(sys, a: MeasurableSet) -> Fraction:
    """Exact measure of a set under the system's invariant measure."""
    _check_owned(sys, a)
    if isinstance(a, ArcUnion):
        return sum((hi - lo for lo, hi in a.arcs), Fraction(0))
    if a.empty:
        return Fraction(0)
    total = Fraction(1)
    for _, symbols in a.constraints:
        total *= sum((sys.probs[j] for j in symbols), Fraction(0))
    return total


def _as_group_element(sys, w) -> tuple[int, ...]:
    coords = w.coords if isinstance(w, LatticePoint) else tuple(int(x) for x in w)
    if len(coords) != sys.q:
        raise ValueError(f"group element {coords} has rank {len(coords)}, expected {sys.q}")
    return coords


def translate(sys, a: MeasurableSet, w) -> MeasurableSet:
    """The set whose indicator is the Koopman image of a's indicator under w.

    For shift systems the constrained coordinates move by the system's shift
    vector; for rotations every arc rotates by the exact rational offset of w.
    Always measure-preserving.
    """
    _check_owned(sys, a)
    coords = _as_group_element(sys, w)
    if isinstance(a, ArcUnion):
        t = sys.rotation_offset(coords)
        shifted: list[Arc] = []
        for lo, hi in a.arcs:
            lo, hi = lo + t, hi + t
            k = math.floor(lo)
            lo, hi = lo - k, hi - k
            if hi <= 1:
                shifted.append((lo, hi))
            else:
                shifted.append((lo, Fraction(1)))
                shifted.append((Fraction(0), hi - 1))
        return ArcUnion(sys.tag, _merge_arcs(shifted))
    if a.empty:
        return a
    delta = sys.shift_vector(coords)
    moved = tuple(
        (tuple(c + d for c, d in zip(coord, delta)), symbols)
        for coord, symbols in a.constraints
    )
    return CylinderSet(sys.tag, tuple(sorted(moved)))


def intersect(a: MeasurableSet, b: MeasurableSet) -> MeasurableSet:
    """Exact intersection inside one set family."""
    _check_same_system(a, b)
    if isinstance(a, ArcUnion) and isinstance(b, ArcUnion):
        out: list[Arc] = []
        for lo1, hi1 in a.arcs:
            for lo2, hi2 in b.arcs:
                lo, hi = max(lo1, lo2), min(hi1, hi2)
                if lo < hi:
                    out.append((lo, hi))
        return ArcUnion(a.system_tag, _merge_arcs(out))
    if isinstance(a, CylinderSet) and isinstance(b, CylinderSet):
        if a.empty or b.empty:
            return CylinderSet(a.system_tag, (), empty=True)
        merged: dict[Coord, frozenset[int]] = dict(a.constraints)
        for coord, symbols in b.constraints:
            merged[coord] = merged[coord] & symbols if coord in merged else symbols
            if not merged[coord]:
                return CylinderSet(a.system_tag, (), empty=True)
        return CylinderSet(a.system_tag, tuple(sorted(merged.items())))
    raise ForeignSetError("cannot intersect a cylinder set with an arc union")


def sym_diff_measure(sys, a: MeasurableSet, b: MeasurableSet) -> Fraction:
    """mu(A symmetric-difference B) = mu(A) + mu(B) - 2 mu(A & B), exact."""
    _check_same_system(a, b)
    return set_measure(sys, a) + set_measure(sys, b) - 2 * set_measure(sys, intersect(a, b))


# --------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    """Finite labeled partition; construct through make_partition for validation."""

    system_tag: str
    cells: tuple[tuple[str, MeasurableSet], ...]

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.cells)

    @property
    def sets(self) -> tuple[MeasurableSet, ...]:
        return tuple(s for _, s in self.cells)


def make_partition(sys, cells: Sequence[tuple[str, MeasurableSet]]) -> Partition:
    """Validated partition: cells pairwise disjoint, measures summing to 1 exactly."""
    if not cells:
        raise PartitionError("a partition needs at least one cell")
    labels = [label for label, _ in cells]
    if len(set(labels)) != len(labels):
        raise PartitionError(f"duplicate cell labels: {labels}")
    for _, s in cells:
        _check_owned(sys, s)
    total = Fraction(0)
    for i, (_, s) in enumerate(cells):
        total += set_measure(sys, s)
        for _, t in cells[i + 1 :]:
            overlap = set_measure(sys, intersect(s, t))
            if overlap != 0:
                raise PartitionError(f"cells overlap with measure {overlap}")
    if total != 1:
        raise PartitionError(f"cell measures sum to {total}, expected 1")
    return Partition(sys.tag, tuple((str(label), s) for label, s in cells))


def trivial_partition(sys) -> Partition:
    return Partition(sys.tag, (("X", full_set(sys)),))


def complement_partition(sys, a: MeasurableSet, label: str = "B") -> Partition:
    """The two-cell partition {A, complement of A}."""
    mu = set_measure(sys, a)
    if mu == 0 or mu == 1:
        raise PartitionError("two-cell partition needs a set of measure strictly between 0 and 1")
    return Partition(sys.tag, ((label, a), (label + "c", complement(sys, a))))


def join(alpha: Partition, eta: Partition) -> Partition:
    """Common refinement; empty intersections are dropped, labels pair up."""
    if alpha.system_tag != eta.system_tag:
        raise ForeignSetError("cannot join partitions of different systems")
    cells = []
    for la, sa in alpha.cells:
        for lb, sb in eta.cells:
            meet = intersect(sa, sb)
            if not meet.empty:
                cells.append((f"{la}&{lb}", meet))
    return Partition(alpha.system_tag, tuple(cells))


def _log(x: float, base: Optional[float]) -> float:
    return math.log(x) if base is None else math.log(x, base)


def partition_entropy(sys, alpha: Partition, base: Optional[float] = None) -> float:
    """Shannon entropy -sum mu log mu (natural log unless base is given)."""
    h = 0.0
    for _, s in alpha.cells:
        mu = set_measure(sys, s)
        if mu > 0:
            h -= float(mu) * _log(float(mu), base)
    return h


def conditional_entropy(
    sys, alpha: Partition, eta: Partition, base: Optional[float] = None
) -> float:
    """H(alpha | eta) = -sum mu(A&D) log(mu(A&D)/mu(D)), empty terms zero."""
    if alpha.system_tag != eta.system_tag:
        raise ForeignSetError("partitions belong to different systems")
    h = 0.0
    for _, d in eta.cells:
        mu_d = set_measure(sys, d)
        if mu_d == 0:
            continue
        for _, a in alpha.cells:
            mu_ad = set_measure(sys, intersect(a, d))
            if mu_ad > 0:
                h -= float(mu_ad) * _log(float(mu_ad / mu_d), base)
    return h


def partition_distance(sys, alpha: Partition, eta: Partition) -> Fraction:
    """Sum of cellwise symmetric-difference measures, cells aligned by position."""
    if len(alpha) != len(eta):
        raise ValueError(
            f"partition distance needs equal cell counts, got {len(alpha)} and {len(eta)}"
        )
    total = Fraction(0)
    for (_, a), (_, b) in zip(alpha.cells, eta.cells):
        total += sym_diff_measure(sys, a, b)
    return total
