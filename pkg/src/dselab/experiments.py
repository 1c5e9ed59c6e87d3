"""Experiment execution, the built-in registry, and artifact files.

compute_experiment turns a validated config into JSON-ready payloads plus CSV
tables; write_artifacts materializes them under an output directory together
with a manifest (config echo, version, timings, sha256 digest per file).
Data artifacts are byte-identical for identical config and seed; the manifest
records wall-clock metadata and is exempt from that guarantee.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from .config import (
    DecomposeSpec,
    ExperimentConfig,
    IdentitiesSpec,
    KroneckerSpec,
    StripSpec,
    SuspensionSpec,
    SystemSpec,
    build_partition,
    build_sequence,
    build_set,
    build_strip,
    build_suspension_test_sets,
    build_system,
    parse_rational,
)
from .entropy import (
    curve_csv_rows,
    curve_jsonable,
    estimate_limsup,
    greedy_directional_sequence,
    sequence_entropy_curve,
)
from .errors import ConfigError, InfeasibleStripError, WidthTooSmallError
from .kronecker import b_independence_check, net_growth_profile, profile_csv_rows, profile_jsonable
from .lattice import Direction, Strip, decompose, point, strip_contains
from .measure import (
    conditional_entropy,
    cylinder,
    join,
    make_partition,
    partition_entropy,
)
from .suspension import measure_preservation_check, phi, random_point
from .systems import (
    arc_partition,
    make_bernoulli_shift,
    make_identity_shift,
    make_rotation_action,
)


@dataclass
class ExperimentResult:
    name: str
    sections: dict = field(default_factory=dict)
    tables: dict[str, list[list]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def jsonable(self) -> dict:
        return {
            "name": self.name,
            "sections": self.sections,
            "tables": self.tables,
            "warnings": self.warnings,
        }

    @classmethod
    def from_jsonable(cls, payload: dict) -> "ExperimentResult":
        return cls(
            name=payload["name"],
            sections=payload.get("sections", {}),
            tables=payload.get("tables", {}),
            warnings=payload.get("warnings", []),
        )


# --------------------------------------------------------------------------
# section runners


def _run_entropy_section(config: ExperimentConfig, result: ExperimentResult) -> None:
    if config.system is None or config.partition is None or config.sequence is None:
        raise ConfigError("entropy experiments need system, partition and sequence")
    sys = build_system(config.system)
    alpha = build_partition(sys, config.partition)
    strip = build_strip(config.strip) if config.strip else None
    spec = config.entropy
    cell_cap = spec.cell_cap if spec else None
    kwargs = {"log_base": config.log_base}
    if cell_cap:
        kwargs["cell_cap"] = cell_cap
    seq_model = config.sequence
    try:
        if seq_model.kind == "greedy":
            if strip is None:
                raise ConfigError("greedy sequences need a strip")
            if not seq_model.horizon:
                raise ConfigError("greedy sequences need a horizon")
            _, curve = greedy_directional_sequence(
                sys,
                alpha,
                strip,
                horizon=seq_model.horizon,
                window=seq_model.window,
                start_m=seq_model.start_m,
                **kwargs,
            )
        else:
            seq = build_sequence(seq_model, strip)
            k = spec.k if spec and spec.k else None
            curve = sequence_entropy_curve(sys, alpha, seq, k, **kwargs)
    except (ConfigError, InfeasibleStripError, WidthTooSmallError):
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = len(curve.samples)
    tail = spec.tail if spec and spec.tail else max(1, (n + 1) // 2)
    est = estimate_limsup(curve, min(tail, n))
    result.sections["entropy"] = {
        "curve": curve_jsonable(curve),
        "estimate": {
            "value": est.value,
            "last": est.last,
            "slope": est.slope,
            "tail": est.tail,
        },
    }
    result.tables["curve"] = curve_csv_rows(curve)
    if curve.truncated:
        result.warnings.append(
            f"entropy curve truncated at step {curve.truncated_at}: cell cap exceeded"
        )


def _run_kronecker_section(config: ExperimentConfig, result: ExperimentResult) -> None:
    if config.system is None or config.strip is None:
        raise ConfigError("kronecker experiments need system and strip")
    spec: KroneckerSpec = config.kronecker
    sys = build_system(config.system)
    strip = build_strip(config.strip)
    b = build_set(sys, spec.set)
    profiles = []
    for i, eps in enumerate(spec.epsilons):
        profile = net_growth_profile(
            sys, b, strip, eps, spec.windows, set_label=spec.set_label
        )
        profiles.append(profile_jsonable(profile))
        result.tables[f"net_eps{i}"] = profile_csv_rows(profile)
    section: dict = {"profiles": profiles}
    if spec.width_pairs:
        checks = []
        for b1, b2 in spec.width_pairs:
            agree = b_independence_check(
                sys,
                b,
                strip.direction,
                parse_rational(b1, "width"),
                parse_rational(b2, "width"),
                spec.epsilons[0],
                spec.windows,
                set_label=spec.set_label,
            )
            checks.append({"b1": b1, "b2": b2, "agree": agree})
        section["b_independence"] = checks
    result.sections["kronecker"] = section


def _run_suspension_section(config: ExperimentConfig, result: ExperimentResult) -> None:
    if config.system is None:
        raise ConfigError("suspension experiments need a system")
    spec: SuspensionSpec = config.suspension
    sys = build_system(config.system)
    beta = parse_rational(spec.beta, "beta")
    rng = random.Random(config.seed)
    betas = [beta] + [
        Fraction(rng.randint(-64, 64), rng.randint(1, 16)) for _ in range(spec.beta_trials)
    ]
    checked = 0
    for bt in betas:
        p = random_point(sys, rng)
        walker = p
        for n in range(1, spec.max_power + 1):
            walker = phi(sys, 1, bt, walker)
            if walker != phi(sys, n, n * bt, p):
                raise AssertionError(
                    f"cocycle identity failed at beta={bt}, n={n}"
                )
        checked += 1
    test_sets = build_suspension_test_sets(sys, spec.test_sets)
    report = measure_preservation_check(
        sys, beta, spec.sample_count, test_sets, seed=config.seed
    )
    result.sections["suspension"] = {
        "cocycle": {
            "betas_checked": checked,
            "max_power": spec.max_power,
            "exact": True,
        },
        "measure_preservation": {
            "sample_count": report.sample_count,
            "seed": report.seed,
            "beta": str(report.beta),
            "passed": report.passed,
            "checks": [
                {
                    "label": c.label,
                    "freq_before": c.freq_before,
                    "freq_after": c.freq_after,
                    "bound": c.bound,
                    "ok": c.ok,
                }
                for c in report.checks
            ],
        },
    }


def _run_decompose_section(config: ExperimentConfig, result: ExperimentResult) -> None:
    spec: DecomposeSpec = config.decompose
    v = Direction.of(parse_rational(spec.v_slope, "slope"))
    w = Direction.of(parse_rational(spec.w_slope, "slope"))
    width = parse_rational(spec.width, "width")
    sv, sw = Strip(v, (width,)), Strip(w, (width,))
    r = spec.grid_radius
    total = 0
    verified = 0
    failures: list[list[int]] = []
    for m in range(-r, r + 1):
        for n in range(-r, r + 1):
            total += 1
            p = point(m, n)
            p1, p2 = decompose(p, v, w, width)
            if (p1 + p2).coords == p.coords and strip_contains(sv, p1) and strip_contains(sw, p2):
                verified += 1
            else:  # pragma: no cover - decomposition is proven exact
                failures.append([m, n])
    result.sections["decompose"] = {
        "grid_radius": r,
        "points": total,
        "verified": verified,
        "all_ok": verified == total,
        "failures": failures,
        "summary": f"{verified}/{total} verified",
    }


def _random_triple(rng: random.Random):
    kind = rng.choice(["fair", "biased", "idshift", "rotation"])
    if kind == "rotation":
        sys = make_rotation_action(2, ["13/21", "5/8"])

        def gen():
            k = rng.randint(2, 5)
            cuts = sorted(rng.sample([Fraction(i, 24) for i in range(24)], k))
            return arc_partition(sys, cuts)

    else:
        if kind == "fair":
            sys = make_bernoulli_shift(2, ["1/2", "1/2"])
        elif kind == "biased":
            sys = make_bernoulli_shift(2, ["1/6", "1/3", "1/2"])
        else:
            sys = make_identity_shift()

        def gen():
            dim = sys.index_dim
            coords = list(
                dict.fromkeys(
                    tuple(rng.randint(-2, 2) for _ in range(dim))
                    for _ in range(rng.randint(1, 2))
                )
            )
            cells = [("", {})]
            for coord in coords:
                symbols = list(range(sys.alphabet_size))
                rng.shuffle(symbols)
                cut = rng.randint(1, len(symbols) - 1)
                groups = [symbols[:cut], symbols[cut:]]
                cells = [
                    (f"{label}{gi}", {**constr, coord: group})
                    for label, constr in cells
                    for gi, group in enumerate(groups)
                ]
            return make_partition(
                sys, [(label, cylinder(sys, constr)) for label, constr in cells]
            )

    return sys, gen(), gen()


def _run_identities_section(config: ExperimentConfig, result: ExperimentResult) -> None:
    spec: IdentitiesSpec = config.identities
    rng = random.Random(config.seed)
    max_gap = 0.0
    bounds_ok = True
    import math

    for _ in range(spec.trials):
        sys, alpha, eta = _random_triple(rng)
        h_join = partition_entropy(sys, join(alpha, eta))
        h_eta = partition_entropy(sys, eta)
        h_cond = conditional_entropy(sys, alpha, eta)
        max_gap = max(max_gap, abs(h_join - h_eta - h_cond))
        h_alpha = partition_entropy(sys, alpha)
        if not (-1e-13 <= h_cond <= h_alpha + 1e-12 and h_alpha <= math.log(len(alpha)) + 1e-12):
            bounds_ok = False  # pragma: no cover - identities hold by construction
    result.sections["identities"] = {
        "trials": spec.trials,
        "max_chain_rule_gap": max_gap,
        "chain_rule_ok": max_gap <= 1e-12,
        "bounds_ok": bounds_ok,
    }


def compute_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute every section present in the config and collect payloads."""
    result = ExperimentResult(name=config.experiment)
    ran = False
    if config.sequence is not None or config.entropy is not None:
        _run_entropy_section(config, result)
        ran = True
    if config.kronecker is not None:
        _run_kronecker_section(config, result)
        ran = True
    if config.suspension is not None:
        _run_suspension_section(config, result)
        ran = True
    if config.decompose is not None:
        _run_decompose_section(config, result)
        ran = True
    if config.identities is not None:
        _run_identities_section(config, result)
        ran = True
    if not ran:
        raise ConfigError(
            "config names no executable section "
            "(sequence/entropy, kronecker, suspension, decompose, identities)"
        )
    return result


# --------------------------------------------------------------------------
# artifact files


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _csv_bytes(rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def write_artifacts(
    result: ExperimentResult,
    config: ExperimentConfig,
    out_dir,
    duration_seconds: Optional[float] = None,
) -> dict:
    """Write JSON payload, CSV tables and the manifest; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[dict] = []

    def _write(name: str, data: bytes) -> None:
        path = out / name
        path.write_bytes(data)
        written.append({"path": name, "sha256": _sha256(data), "bytes": len(data)})

    payload = json.dumps(result.jsonable(), indent=2, sort_keys=True).encode("utf-8")
    _write(f"{result.name}.json", payload)
    for table_name, rows in sorted(result.tables.items()):
        _write(f"{result.name}.{table_name}.csv", _csv_bytes(rows))
    manifest = {
        "experiment": result.name,
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "duration_seconds": duration_seconds,
        "config": config.model_dump(mode="json"),
        "outputs": written,
        "warnings": result.warnings,
    }
    manifest_bytes = json.dumps(manifest, indent=2, sort_keys=True).encode("utf-8")
    (out / f"{result.name}.manifest.json").write_bytes(manifest_bytes)
    return manifest


def run_experiment(config: ExperimentConfig, out_dir) -> tuple[ExperimentResult, dict]:
    start = time.perf_counter()
    result = compute_experiment(config)
    manifest = write_artifacts(
        result, config, out_dir, duration_seconds=time.perf_counter() - start
    )
    return result, manifest


# --------------------------------------------------------------------------
# built-in registry


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    summary: str
    claim: str
    factory: Callable[[], ExperimentConfig]

    def config(self) -> ExperimentConfig:
        return self.factory()


def _idshift_system() -> SystemSpec:
    return SystemSpec(kind="identity_shift")


def _rotation_system() -> SystemSpec:
    return SystemSpec(kind="rotation", q=2, angles=["13/21", "5/8"])


def _fair_system() -> SystemSpec:
    return SystemSpec(kind="bernoulli", q=2, probs=["1/2", "1/2"])


def _cfg_identity_shift_vertical() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="identity-shift-vertical",
        system=_idshift_system(),
        partition={"kind": "time_zero"},
        sequence={"kind": "explicit", "points": [[0, n] for n in range(1, 33)]},
        entropy={"k": 32, "tail": 16},
    )


def _cfg_one_zero_direction() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="one-zero-direction",
        system=_idshift_system(),
        partition={"kind": "time_zero"},
        strip=StripSpec(slopes=["0"], widths=["1"]),
        sequence={"kind": "monotone", "count": 64, "start_m": 0},
        entropy={"tail": 32},
    )


def _cfg_idshift_greedy(name: str, slope: str) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=name,
        system=_idshift_system(),
        partition={"kind": "time_zero"},
        strip=StripSpec(slopes=[slope], widths=["1"]),
        sequence={"kind": "greedy", "horizon": 32, "window": 8},
        entropy={"tail": 16},
    )


def _cfg_bernoulli_greedy() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="bernoulli-greedy-diagonal",
        system=_fair_system(),
        partition={"kind": "time_zero"},
        strip=StripSpec(slopes=["1"], widths=["1"]),
        sequence={"kind": "greedy", "horizon": 20, "window": 8},
        entropy={"tail": 10},
    )


ROTATION_WINDOWS = [(1, 42 * k) for k in range(1, 9)]
BERNOULLI_WINDOWS = [(1, 8 * k) for k in range(1, 9)]


def _cfg_kronecker_rotation(name: str, slope: str) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=name,
        system=_rotation_system(),
        partition={"kind": "arcs", "cuts": ["0", "1/2"]},
        strip=StripSpec(slopes=[slope], widths=["1"]),
        sequence={"kind": "monotone", "count": 64, "start_m": 0},
        entropy={"tail": 32},
        kronecker=KroneckerSpec(
            set={"kind": "arcs", "arcs": [["0", "1/2"]]},
            epsilons=[0.05, 0.1, 0.2],
            windows=ROTATION_WINDOWS,
        ),
    )


def _cfg_kronecker_bernoulli() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="kronecker-bernoulli",
        system=_fair_system(),
        partition={"kind": "time_zero"},
        strip=StripSpec(slopes=["1"], widths=["1"]),
        sequence={"kind": "greedy", "horizon": 20, "window": 8},
        entropy={"tail": 10},
        kronecker=KroneckerSpec(
            set={"kind": "cylinder", "constraints": [{"coord": [0, 0], "symbols": [0]}]},
            epsilons=[0.5],
            windows=BERNOULLI_WINDOWS,
        ),
    )


def _cfg_b_independence(name: str, system: SystemSpec, slope: str, eps: float, windows) -> Callable:
    def factory() -> ExperimentConfig:
        if system.kind == "rotation":
            target = {"kind": "arcs", "arcs": [["0", "1/2"]]}
        else:
            coord = [0] * (1 if system.kind == "identity_shift" else system.q)
            target = {"kind": "cylinder", "constraints": [{"coord": coord, "symbols": [0]}]}
        return ExperimentConfig(
            experiment=name,
            system=system,
            strip=StripSpec(slopes=[slope], widths=["1"]),
            kronecker=KroneckerSpec(
                set=target,
                epsilons=[eps],
                windows=windows,
                width_pairs=[("1", "4"), ("1", "3")],
            ),
        )

    return factory


def _cfg_decompose_grid() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="decompose-grid",
        decompose=DecomposeSpec(v_slope="0", w_slope="1", width="9", grid_radius=50),
    )


def _cfg_entropy_identities() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="entropy-identities",
        identities=IdentitiesSpec(trials=200),
        seed=20260810,
    )


def _cfg_suspension() -> ExperimentConfig:
    return ExperimentConfig(
        experiment="suspension-cocycle",
        system=_rotation_system(),
        suspension=SuspensionSpec(
            beta="5/8", sample_count=10_000, max_power=64, beta_trials=50
        ),
        seed=7,
    )


REGISTRY: dict[str, RegistryEntry] = {
    entry.name: entry
    for entry in [
        RegistryEntry(
            "identity-shift-vertical",
            "identity-shift product, vertical sequence of 32 shifts",
            "a direction acted on by the shift carries average entropy log 2 at every horizon",
            _cfg_identity_shift_vertical,
        ),
        RegistryEntry(
            "one-zero-direction",
            "identity-shift product, monotone sequence in the slope-0 strip",
            "the identity direction is null: joint entropy stays log 2, averages decay like 1/k",
            _cfg_one_zero_direction,
        ),
        RegistryEntry(
            "identity-shift-diagonal",
            "identity-shift product, greedy search in the slope 1 strip",
            "a second direction attains log 2, so at most one direction is null",
            lambda: _cfg_idshift_greedy("identity-shift-diagonal", "1"),
        ),
        RegistryEntry(
            "identity-shift-antidiagonal",
            "identity-shift product, greedy search in the slope -1 strip",
            "a third direction also attains log 2, so at most one direction is null",
            lambda: _cfg_idshift_greedy("identity-shift-antidiagonal", "-1"),
        ),
        RegistryEntry(
            "bernoulli-greedy-diagonal",
            "fair planar Bernoulli shift, greedy search in the slope 1 strip",
            "weak mixing attains the conditional-entropy upper bound: every increment is log 2",
            _cfg_bernoulli_greedy,
        ),
        RegistryEntry(
            "kronecker-rotation",
            "rotation action, slope 0 strip: entropy curve and net growth at three radii",
            "discrete spectrum: nets stabilize (compact) and strip averages obey log(2k)/k",
            lambda: _cfg_kronecker_rotation("kronecker-rotation", "0"),
        ),
        RegistryEntry(
            "kronecker-rotation-diagonal",
            "rotation action, slope 1 strip: entropy curve and net growth at three radii",
            "discrete spectrum holds in a second direction: nets stabilize there too",
            lambda: _cfg_kronecker_rotation("kronecker-rotation-diagonal", "1"),
        ),
        RegistryEntry(
            "kronecker-rotation-antidiagonal",
            "rotation action, slope -1 strip: entropy curve and net growth at three radii",
            "discrete spectrum holds in a third direction: nets stabilize there too",
            lambda: _cfg_kronecker_rotation("kronecker-rotation-antidiagonal", "-1"),
        ),
        RegistryEntry(
            "kronecker-bernoulli",
            "fair Bernoulli shift: greedy entropy plus net growth in the slope 1 strip",
            "non-null direction is non-compact: net size equals point count, entropy exceeds 0.1",
            _cfg_kronecker_bernoulli,
        ),
        RegistryEntry(
            "b-independence-rotation",
            "rotation action: verdicts at strip widths (1,4) and (1,3)",
            "compactness verdicts do not depend on the strip width",
            _cfg_b_independence(
                "b-independence-rotation", _rotation_system(), "0", 0.1, ROTATION_WINDOWS
            ),
        ),
        RegistryEntry(
            "b-independence-bernoulli",
            "fair Bernoulli shift: verdicts at strip widths (1,4) and (1,3)",
            "non-compactness verdicts do not depend on the strip width",
            _cfg_b_independence(
                "b-independence-bernoulli", _fair_system(), "1", 0.5, BERNOULLI_WINDOWS
            ),
        ),
        RegistryEntry(
            "b-independence-identity-shift",
            "identity-shift product: verdicts at strip widths (1,4) and (1,3)",
            "verdicts along the identity direction do not depend on the strip width",
            _cfg_b_independence(
                "b-independence-identity-shift",
                _idshift_system(),
                "0",
                0.5,
                BERNOULLI_WINDOWS,
            ),
        ),
        RegistryEntry(
            "decompose-grid",
            "exhaustive strip-sum decomposition over the [-50,50]^2 grid",
            "every planar point splits into a slope-0 strip point plus a slope-1 strip point",
            _cfg_decompose_grid,
        ),
        RegistryEntry(
            "entropy-identities",
            "randomized chain-rule and bound checks across the system zoo",
            "join entropy equals conditional entropy plus marginal entropy, exactly",
            _cfg_entropy_identities,
        ),
        RegistryEntry(
            "suspension-cocycle",
            "suspension skew maps: exact cocycle identity and invariance at 3 sigma",
            "the time-one skew map iterates to the full skew map and preserves the product measure",
            _cfg_suspension,
        ),
    ]
}


def catalog() -> list[dict]:
    return [
        {"name": e.name, "summary": e.summary, "claim": e.claim}
        for e in REGISTRY.values()
    ]


def builtin_config(name: str) -> ExperimentConfig:
    entry = REGISTRY.get(name)
    if entry is None:
        raise ConfigError(
            f"unknown experiment {name!r}; `list` shows the built-in catalog"
        )
    return entry.config()
