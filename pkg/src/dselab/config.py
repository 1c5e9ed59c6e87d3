"""Experiment configuration schema and builders.

Configs are JSON documents validated by pydantic models.  Every rational
quantity travels as a string like "13/21" so values round-trip exactly; the
builders turn validated specs into core objects and raise ConfigError on
anything inconsistent (unknown kinds, mismatched dimensions, bad rationals).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal, Optional

from pydantic import BaseModel, Field

from .entropy import DEFAULT_CELL_CAP
from .errors import ConfigError, InfeasibleStripError, WidthTooSmallError
from .lattice import Direction, LatticePoint, SequenceSpec, Strip, monotone_sequence
from .measure import MeasurableSet, Partition, arc_set, cylinder, make_partition
from .suspension import SuspensionTestSet
from .systems import (
    System,
    arc_partition,
    make_bernoulli_shift,
    make_identity_shift,
    make_rotation_action,
    time_zero_partition,
)


def parse_rational(text, what: str = "rational") -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"bad {what}: {text!r} ({exc})") from exc


# --------------------------------------------------------------------------
# specs


class SystemSpec(BaseModel):
    kind: Literal["bernoulli", "identity_shift", "rotation"]
    q: int = 2
    probs: Optional[list[str]] = None
    angles: Optional[list[str]] = None


class ConstraintSpec(BaseModel):
    coord: list[int]
    symbols: list[int]


class SetSpec(BaseModel):
    kind: Literal["cylinder", "arcs"]
    constraints: Optional[list[ConstraintSpec]] = None
    arcs: Optional[list[list[str]]] = None


class CellSpec(BaseModel):
    label: str
    set: SetSpec


class PartitionSpec(BaseModel):
    kind: Literal["time_zero", "arcs", "cells"]
    cuts: Optional[list[str]] = None
    cells: Optional[list[CellSpec]] = None


class StripSpec(BaseModel):
    slopes: list[str]
    widths: list[str]


class SequenceSpecModel(BaseModel):
    kind: Literal["explicit", "monotone", "greedy"]
    points: Optional[list[list[int]]] = None
    count: Optional[int] = None
    stride: int = 1
    start_m: int = 0
    horizon: Optional[int] = None
    window: int = 8


class EntropySpec(BaseModel):
    k: Optional[int] = None
    tail: Optional[int] = None
    cell_cap: int = DEFAULT_CELL_CAP


class KroneckerSpec(BaseModel):
    set: SetSpec
    set_label: str = "B"
    epsilons: list[float]
    windows: list[tuple[int, int]]
    width_pairs: Optional[list[tuple[str, str]]] = None


class RectSpec(BaseModel):
    u: tuple[str, str]
    v: tuple[str, str]


class SuspensionTestSetSpec(BaseModel):
    label: str
    set: Optional[SetSpec] = None
    rect: Optional[RectSpec] = None


class SuspensionSpec(BaseModel):
    beta: str
    sample_count: int = 10_000
    max_power: int = 64
    beta_trials: int = 0
    test_sets: Optional[list[SuspensionTestSetSpec]] = None


class DecomposeSpec(BaseModel):
    v_slope: str
    w_slope: str
    width: str
    grid_radius: int = 50


class IdentitiesSpec(BaseModel):
    trials: int = 200


class ExperimentConfig(BaseModel):
    experiment: str = Field(min_length=1)
    system: Optional[SystemSpec] = None
    partition: Optional[PartitionSpec] = None
    strip: Optional[StripSpec] = None
    sequence: Optional[SequenceSpecModel] = None
    entropy: Optional[EntropySpec] = None
    kronecker: Optional[KroneckerSpec] = None
    suspension: Optional[SuspensionSpec] = None
    decompose: Optional[DecomposeSpec] = None
    identities: Optional[IdentitiesSpec] = None
    log_base: Optional[float] = None
    seed: int = 0


# --------------------------------------------------------------------------
# builders


def build_system(spec: SystemSpec) -> System:
    try:
        if spec.kind == "bernoulli":
            if not spec.probs:
                raise ConfigError("bernoulli system needs probs")
            return make_bernoulli_shift(
                spec.q, [parse_rational(p, "probability") for p in spec.probs]
            )
        if spec.kind == "identity_shift":
            return make_identity_shift()
        if not spec.angles:
            raise ConfigError("rotation system needs angles")
        return make_rotation_action(
            spec.q, [parse_rational(a, "angle") for a in spec.angles]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_strip(spec: StripSpec) -> Strip:
    slopes = [parse_rational(s, "slope") for s in spec.slopes]
    widths = [parse_rational(b, "width") for b in spec.widths]
    try:
        return Strip(Direction.of(*slopes), tuple(widths))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_set(sys: System, spec: SetSpec) -> MeasurableSet:
    try:
        if spec.kind == "cylinder":
            if not spec.constraints:
                raise ConfigError("cylinder set needs constraints")
            return cylinder(
                sys, {tuple(c.coord): c.symbols for c in spec.constraints}
            )
        if not spec.arcs:
            raise ConfigError("arc set needs arcs")
        return arc_set(
            sys,
            [
                (parse_rational(lo, "arc endpoint"), parse_rational(hi, "arc endpoint"))
                for lo, hi in spec.arcs
            ],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_partition(sys: System, spec: PartitionSpec) -> Partition:
    try:
        if spec.kind == "time_zero":
            return time_zero_partition(sys)
        if spec.kind == "arcs":
            if not spec.cuts:
                raise ConfigError("arc partition needs cuts")
            return arc_partition(sys, [parse_rational(c, "cut") for c in spec.cuts])
        if not spec.cells:
            raise ConfigError("cell partition needs cells")
        return make_partition(
            sys, [(cell.label, build_set(sys, cell.set)) for cell in spec.cells]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_sequence(
    spec: SequenceSpecModel, strip: Optional[Strip]
) -> SequenceSpec:
    """Realize an explicit or monotone sequence; greedy sequences are built
    by the entropy runner because they depend on the system and partition."""
    try:
        if spec.kind == "explicit":
            if not spec.points:
                raise ConfigError("explicit sequence needs points")
            pts = tuple(LatticePoint(tuple(p)) for p in spec.points)
            return SequenceSpec(pts, strip=strip)
        if spec.kind == "monotone":
            if strip is None:
                raise ConfigError("monotone sequence needs a strip")
            if not spec.count:
                raise ConfigError("monotone sequence needs a count")
            return monotone_sequence(
                strip, spec.count, stride=spec.stride, start_m=spec.start_m
            )
    except (ConfigError, InfeasibleStripError, WidthTooSmallError):
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("greedy sequences are realized by the entropy runner")


def build_rect(spec: RectSpec):
    return (
        (parse_rational(spec.u[0], "rect bound"), parse_rational(spec.u[1], "rect bound")),
        (parse_rational(spec.v[0], "rect bound"), parse_rational(spec.v[1], "rect bound")),
    )


def build_suspension_test_sets(
    sys: System, specs: Optional[list[SuspensionTestSetSpec]]
) -> list[SuspensionTestSet]:
    if specs is None:
        if sys.kind == "rotation":
            base = arc_set(sys, [(Fraction(0), Fraction(1, 2))])
        else:
            base = cylinder(sys, {(0,) * sys.index_dim: 0})
        half = (Fraction(0), Fraction(1, 2))
        return [SuspensionTestSet(label="default", base_set=base, rect=(half, half))]
    out = []
    for ts in specs:
        out.append(
            SuspensionTestSet(
                label=ts.label,
                base_set=build_set(sys, ts.set) if ts.set is not None else None,
                rect=build_rect(ts.rect) if ts.rect is not None else None,
            )
        )
    return out
