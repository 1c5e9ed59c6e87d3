"""FastAPI service wrapping the lab: every operation behind a typed endpoint.

The service returns computation payloads inline; writing artifact files is
the client's concern (the bundled CLI does exactly that).  Domain errors map
to 422 with a machine-readable error record, infeasible geometry to 409.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .config import (
    ExperimentConfig,
    PartitionSpec,
    SequenceSpecModel,
    SetSpec,
    StripSpec,
    SuspensionSpec,
    SystemSpec,
    build_partition,
    build_sequence,
    build_set,
    build_strip,
    build_system,
    parse_rational,
)
from .entropy import (
    curve_jsonable,
    estimate_limsup,
    greedy_directional_sequence,
    sequence_entropy_curve,
)
from .errors import ConfigError, InfeasibleStripError, WidthTooSmallError
from .experiments import catalog, compute_experiment
from .kronecker import net_growth_profile, profile_jsonable
from .lattice import (
    Direction,
    LatticePoint,
    Strip,
    decompose,
    monotone_sequence,
    strip_contains,
    strip_points,
)

app = FastAPI(
    title="dselab",
    version=__version__,
    description=(
        "Exact directional-entropy and Koopman-compactness experiments "
        "on lattice group actions"
    ),
)


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (InfeasibleStripError, WidthTooSmallError) as exc:
        raise _error(409, "infeasible", str(exc)) from exc
    except (ConfigError, ValueError) as exc:
        raise _error(422, "bad-config", str(exc)) from exc


# --------------------------------------------------------------------------
# request/response models


class HealthResponse(BaseModel):
    status: str
    version: str


class CatalogEntryModel(BaseModel):
    name: str
    summary: str
    claim: str


class CatalogResponse(BaseModel):
    experiments: list[CatalogEntryModel]


class RunResponse(BaseModel):
    name: str
    sections: dict
    tables: dict[str, list]
    warnings: list[str]


class StripPointsRequest(BaseModel):
    strip: StripSpec
    m_lo: int
    m_hi: int


class PointsResponse(BaseModel):
    points: list[list[int]]


class StripContainsRequest(BaseModel):
    strip: StripSpec
    point: list[int]


class ContainsResponse(BaseModel):
    contains: bool


class MonotoneRequest(BaseModel):
    strip: StripSpec
    count: int
    stride: int = 1
    start_m: int = 0


class DecomposeRequest(BaseModel):
    v_slope: str
    w_slope: str
    width: str
    point: list[int]


class DecomposeResponse(BaseModel):
    p1: list[int]
    p2: list[int]


class EntropyCurveRequest(BaseModel):
    system: SystemSpec
    partition: PartitionSpec
    sequence: SequenceSpecModel
    strip: Optional[StripSpec] = None
    k: Optional[int] = None
    tail: Optional[int] = None
    cell_cap: Optional[int] = None
    log_base: Optional[float] = None


class GreedyRequest(BaseModel):
    system: SystemSpec
    partition: PartitionSpec
    strip: StripSpec
    horizon: int
    window: int = 8
    start_m: int = 0
    cell_cap: Optional[int] = None
    log_base: Optional[float] = None


class KroneckerProfileRequest(BaseModel):
    system: SystemSpec
    set: SetSpec
    strip: StripSpec
    epsilon: float
    windows: list[tuple[int, int]]
    set_label: str = "B"


class BIndependenceRequest(BaseModel):
    system: SystemSpec
    set: SetSpec
    slopes: list[str]
    b1: str
    b2: str
    epsilon: float
    windows: list[tuple[int, int]]


class BIndependenceResponse(BaseModel):
    agree: bool
    verdict_b1: str
    verdict_b2: str


class SuspensionCheckRequest(BaseModel):
    system: SystemSpec
    suspension: SuspensionSpec
    seed: int = 0


# --------------------------------------------------------------------------
# endpoints


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/experiments", response_model=CatalogResponse)
def list_experiments() -> CatalogResponse:
    return CatalogResponse(
        experiments=[CatalogEntryModel(**entry) for entry in catalog()]
    )


@app.post("/experiments/run", response_model=RunResponse)
def run_experiment_endpoint(config: ExperimentConfig) -> RunResponse:
    result = _guard(compute_experiment, config)
    return RunResponse(
        name=result.name,
        sections=result.sections,
        tables=result.tables,
        warnings=result.warnings,
    )


@app.post("/strip/points", response_model=PointsResponse)
def strip_points_endpoint(req: StripPointsRequest) -> PointsResponse:
    strip = _guard(build_strip, req.strip)
    pts = _guard(strip_points, strip, req.m_lo, req.m_hi)
    return PointsResponse(points=[list(p.coords) for p in pts])


@app.post("/strip/contains", response_model=ContainsResponse)
def strip_contains_endpoint(req: StripContainsRequest) -> ContainsResponse:
    strip = _guard(build_strip, req.strip)
    inside = _guard(strip_contains, strip, LatticePoint(tuple(req.point)))
    return ContainsResponse(contains=inside)


@app.post("/strip/monotone", response_model=PointsResponse)
def monotone_endpoint(req: MonotoneRequest) -> PointsResponse:
    strip = _guard(build_strip, req.strip)
    seq = _guard(
        monotone_sequence, strip, req.count, stride=req.stride, start_m=req.start_m
    )
    return PointsResponse(points=[list(p.coords) for p in seq.points])


@app.post("/lattice/decompose", response_model=DecomposeResponse)
def decompose_endpoint(req: DecomposeRequest) -> DecomposeResponse:
    v = Direction.of(_guard(parse_rational, req.v_slope, "slope"))
    w = Direction.of(_guard(parse_rational, req.w_slope, "slope"))
    width = _guard(parse_rational, req.width, "width")
    p1, p2 = _guard(decompose, LatticePoint(tuple(req.point)), v, w, width)
    return DecomposeResponse(p1=list(p1.coords), p2=list(p2.coords))


@app.post("/entropy/curve")
def entropy_curve_endpoint(req: EntropyCurveRequest) -> dict:
    sys = _guard(build_system, req.system)
    alpha = _guard(build_partition, sys, req.partition)
    strip = _guard(build_strip, req.strip) if req.strip else None
    seq = _guard(build_sequence, req.sequence, strip)
    kwargs = {"log_base": req.log_base}
    if req.cell_cap:
        kwargs["cell_cap"] = req.cell_cap
    curve = _guard(sequence_entropy_curve, sys, alpha, seq, req.k, **kwargs)
    n = len(curve.samples)
    tail = min(req.tail, n) if req.tail else max(1, (n + 1) // 2)
    est = estimate_limsup(curve, tail)
    return {
        "curve": curve_jsonable(curve),
        "estimate": {"value": est.value, "last": est.last, "slope": est.slope, "tail": est.tail},
    }


@app.post("/entropy/greedy")
def entropy_greedy_endpoint(req: GreedyRequest) -> dict:
    sys = _guard(build_system, req.system)
    alpha = _guard(build_partition, sys, req.partition)
    strip = _guard(build_strip, req.strip)
    kwargs = {"log_base": req.log_base, "start_m": req.start_m}
    if req.cell_cap:
        kwargs["cell_cap"] = req.cell_cap
    seq, curve = _guard(
        greedy_directional_sequence, sys, alpha, strip, req.horizon, req.window, **kwargs
    )
    return {
        "sequence": [list(p.coords) for p in seq.points],
        "curve": curve_jsonable(curve),
    }


@app.post("/kronecker/profile")
def kronecker_profile_endpoint(req: KroneckerProfileRequest) -> dict:
    sys = _guard(build_system, req.system)
    b = _guard(build_set, sys, req.set)
    strip = _guard(build_strip, req.strip)
    profile = _guard(
        net_growth_profile, sys, b, strip, req.epsilon, req.windows, set_label=req.set_label
    )
    return profile_jsonable(profile)


@app.post("/kronecker/b-independence", response_model=BIndependenceResponse)
def b_independence_endpoint(req: BIndependenceRequest) -> BIndependenceResponse:
    sys = _guard(build_system, req.system)
    b = _guard(build_set, sys, req.set)
    slopes = [_guard(parse_rational, s, "slope") for s in req.slopes]
    direction = Direction.of(*slopes)
    b1 = _guard(parse_rational, req.b1, "width")
    b2 = _guard(parse_rational, req.b2, "width")
    dims = direction.q - 1
    prof1 = _guard(
        net_growth_profile, sys, b, Strip(direction, (b1,) * dims), req.epsilon, req.windows
    )
    prof2 = _guard(
        net_growth_profile, sys, b, Strip(direction, (b2,) * dims), req.epsilon, req.windows
    )
    return BIndependenceResponse(
        agree=prof1.verdict == prof2.verdict,
        verdict_b1=prof1.verdict.value,
        verdict_b2=prof2.verdict.value,
    )


@app.post("/suspension/check")
def suspension_check_endpoint(req: SuspensionCheckRequest) -> dict:
    config = ExperimentConfig(
        experiment="suspension-check",
        system=req.system,
        suspension=req.suspension,
        seed=req.seed,
    )
    result = _guard(compute_experiment, config)
    return result.sections["suspension"]
