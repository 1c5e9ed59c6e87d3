"""Thin command-line client for the lab service.

Every subcommand builds the same JSON payload the HTTP service accepts and
either dispatches it in process (default) or POSTs it to a running server
(--server URL).  `run` additionally writes artifact files and a manifest.

Exit codes: 0 success, 1 unexpected failure, 2 configuration/parse error,
3 infeasible geometry.  Cell-cap truncations are warnings, not failures.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

from fastapi import HTTPException
from pydantic import ValidationError

from . import __version__, service
from .config import ExperimentConfig
from .errors import ConfigError, InfeasibleStripError, WidthTooSmallError
from .experiments import (
    ExperimentResult,
    builtin_config,
    catalog,
    compute_experiment,
    write_artifacts,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


_POST_ENDPOINTS = {
    "strip/points": (service.StripPointsRequest, service.strip_points_endpoint),
    "strip/contains": (service.StripContainsRequest, service.strip_contains_endpoint),
    "strip/monotone": (service.MonotoneRequest, service.monotone_endpoint),
    "lattice/decompose": (service.DecomposeRequest, service.decompose_endpoint),
    "entropy/curve": (service.EntropyCurveRequest, service.entropy_curve_endpoint),
    "entropy/greedy": (service.GreedyRequest, service.entropy_greedy_endpoint),
    "kronecker/profile": (service.KroneckerProfileRequest, service.kronecker_profile_endpoint),
    "kronecker/b-independence": (service.BIndependenceRequest, service.b_independence_endpoint),
    "suspension/check": (service.SuspensionCheckRequest, service.suspension_check_endpoint),
    "experiments/run": (ExperimentConfig, service.run_experiment_endpoint),
}


def _map_http_error(status: int, detail) -> CliError:
    code = EXIT_ERROR
    message = str(detail)
    if isinstance(detail, dict):
        message = detail.get("message", message)
        if detail.get("code") == "infeasible":
            code = EXIT_INFEASIBLE
        elif detail.get("code") == "bad-config":
            code = EXIT_CONFIG
    if status == 422 and code == EXIT_ERROR:
        code = EXIT_CONFIG
    return CliError(message, code)


def call(server: str | None, path: str, payload: dict) -> dict:
    """POST a payload to the service, in process or over HTTP."""
    if server:
        import httpx

        response = httpx.post(
            f"{server.rstrip('/')}/{path}", json=payload, timeout=600.0
        )
        if response.status_code >= 400:
            body = response.json() if response.headers.get("content-type", "").startswith("application/json") else {}
            raise _map_http_error(response.status_code, body.get("detail", body))
        return response.json()
    model_cls, fn = _POST_ENDPOINTS[path]
    try:
        request = model_cls.model_validate(payload)
    except ValidationError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    try:
        out = fn(request)
    except HTTPException as exc:
        raise _map_http_error(exc.status_code, exc.detail) from exc
    return out if isinstance(out, dict) else out.model_dump(mode="json")


def fetch_catalog(server: str | None) -> list[dict]:
    if server:
        import httpx

        response = httpx.get(f"{server.rstrip('/')}/experiments", timeout=60.0)
        response.raise_for_status()
        return response.json()["experiments"]
    return catalog()


# --------------------------------------------------------------------------
# shared argument helpers


def _add_server(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--server", help="base URL of a running dselab service")


def _add_strip_args(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument(
        "--slopes", required=required, help="comma-separated slopes, e.g. 1 or 1/2,-1/3"
    )
    parser.add_argument(
        "--widths", required=required, help="comma-separated widths, e.g. 1 or 1,2"
    )


def _add_system_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--system",
        required=True,
        choices=["bernoulli", "identity_shift", "rotation"],
    )
    parser.add_argument("--q", type=int, default=2)
    parser.add_argument("--probs", help="comma-separated probabilities, e.g. 1/2,1/2")
    parser.add_argument("--angles", help="comma-separated angles, e.g. 13/21,5/8")


def _csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _parse_point(text: str) -> list[int]:
    try:
        return [int(part) for part in _csv_list(text)]
    except ValueError as exc:
        raise CliError(f"bad lattice point {text!r}", EXIT_CONFIG) from exc


def _parse_windows(text: str) -> list[list[int]]:
    out = []
    for chunk in _csv_list(text):
        lo, _, hi = chunk.partition(":")
        try:
            out.append([int(lo), int(hi)])
        except ValueError as exc:
            raise CliError(f"bad window {chunk!r}, expected lo:hi", EXIT_CONFIG) from exc
    return out


def _strip_payload(args) -> dict:
    return {"slopes": _csv_list(args.slopes), "widths": _csv_list(args.widths)}


def _system_payload(args) -> dict:
    payload: dict = {"kind": args.system, "q": args.q}
    if args.probs:
        payload["probs"] = _csv_list(args.probs)
    if args.angles:
        payload["angles"] = _csv_list(args.angles)
    return payload


def _partition_payload(args) -> dict:
    if args.partition == "arcs":
        if not args.cuts:
            raise CliError("--partition arcs needs --cuts", EXIT_CONFIG)
        return {"kind": "arcs", "cuts": _csv_list(args.cuts)}
    return {"kind": "time_zero"}


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


# --------------------------------------------------------------------------
# subcommands


def cmd_list(args) -> int:
    entries = fetch_catalog(args.server)
    if args.json:
        _print_json(entries)
        return EXIT_OK
    width = max(len(e["name"]) for e in entries)
    for e in entries:
        print(f"{e['name']:<{width}}  {e['summary']}")
        print(f"{'':<{width}}  -> {e['claim']}")
    return EXIT_OK


def _load_config(source: str) -> ExperimentConfig:
    path = Path(source)
    if path.exists():
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"config {source} is not valid JSON: {exc}", EXIT_CONFIG) from exc
        try:
            return ExperimentConfig.model_validate(raw)
        except ValidationError as exc:
            raise CliError(f"config {source} failed validation: {exc}", EXIT_CONFIG) from exc
    try:
        return builtin_config(source)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc


def cmd_run(args) -> int:
    config = _load_config(args.config)
    out_dir = Path(args.out)
    if args.server:
        payload = call(args.server, "experiments/run", config.model_dump(mode="json"))
        result = ExperimentResult.from_jsonable(payload)
        manifest = write_artifacts(result, config, out_dir)
    else:
        try:
            result = compute_experiment(config)
        except (InfeasibleStripError, WidthTooSmallError) as exc:
            raise CliError(str(exc), EXIT_INFEASIBLE) from exc
        except (ConfigError, ValidationError) as exc:
            raise CliError(str(exc), EXIT_CONFIG) from exc
        manifest = write_artifacts(result, config, out_dir)
    for warning in result.warnings:
        print(f"warning: {warning}", file=_sys.stderr)
    print(f"experiment {result.name}: {len(manifest['outputs'])} artifact(s) in {out_dir}")
    for item in manifest["outputs"]:
        print(f"  {item['path']}  sha256={item['sha256'][:12]}  {item['bytes']}B")
    return EXIT_OK


def cmd_strip(args) -> int:
    if args.contains:
        payload = {"strip": _strip_payload(args), "point": _parse_point(args.contains)}
        out = call(args.server, "strip/contains", payload)
        print("inside" if out["contains"] else "outside")
        return EXIT_OK
    if args.monotone:
        payload = {
            "strip": _strip_payload(args),
            "count": args.monotone,
            "stride": args.stride,
            "start_m": args.start_m,
        }
        out = call(args.server, "strip/monotone", payload)
    else:
        if args.points is None:
            raise CliError("strip needs one of --points, --contains, --monotone", EXIT_CONFIG)
        lo, hi = args.points
        payload = {"strip": _strip_payload(args), "m_lo": lo, "m_hi": hi}
        out = call(args.server, "strip/points", payload)
    if args.json:
        _print_json(out)
    else:
        for p in out["points"]:
            print(",".join(str(c) for c in p))
    return EXIT_OK


def cmd_decompose(args) -> int:
    payload = {
        "v_slope": args.v,
        "w_slope": args.w,
        "width": args.b,
        "point": _parse_point(args.point),
    }
    out = call(args.server, "lattice/decompose", payload)
    print(f"p1={tuple(out['p1'])} p2={tuple(out['p2'])}")
    return EXIT_OK


def cmd_entropy(args) -> int:
    system = _system_payload(args)
    partition = _partition_payload(args)
    strip = _strip_payload(args) if args.slopes else None
    common: dict = {"system": system, "partition": partition}
    if strip:
        common["strip"] = strip
    if args.log_base:
        common["log_base"] = args.log_base
    if args.greedy:
        common.update({"horizon": args.greedy, "window": args.window, "start_m": args.start_m})
        out = call(args.server, "entropy/greedy", common)
    else:
        if args.monotone:
            sequence = {
                "kind": "monotone",
                "count": args.monotone,
                "stride": args.stride,
                "start_m": args.start_m,
            }
        elif args.points_list:
            sequence = {
                "kind": "explicit",
                "points": [_parse_point(chunk) for chunk in args.points_list.split(";")],
            }
        else:
            raise CliError(
                "entropy needs one of --greedy, --monotone, --points-list", EXIT_CONFIG
            )
        common["sequence"] = sequence
        if args.k:
            common["k"] = args.k
        if args.tail:
            common["tail"] = args.tail
        out = call(args.server, "entropy/curve", common)
    if args.json:
        _print_json(out)
        return EXIT_OK
    curve = out["curve"]
    print(f"partition {curve['partition']}; {len(curve['samples'])} steps")
    for s in curve["samples"]:
        pt = ",".join(str(c) for c in s["point"])
        print(
            f"k={s['k']:>3} joint={s['joint']:.12f} avg={s['average']:.12f} "
            f"inc={s['increment']:.12f} point=({pt})"
        )
    if curve.get("truncated_at"):
        print(f"warning: truncated at step {curve['truncated_at']}", file=_sys.stderr)
    if "estimate" in out:
        est = out["estimate"]
        print(
            f"tail max={est['value']:.12f} last={est['last']:.12f} slope={est['slope']:.3e}"
        )
    return EXIT_OK


def _set_payload(args) -> dict:
    if args.arc:
        arcs = [chunk.split(",") for chunk in args.arc.split(";")]
        return {"kind": "arcs", "arcs": arcs}
    if args.cylinder:
        constraints = []
        for chunk in _csv_list(args.cylinder.replace(";", ",")):
            coords, _, symbol = chunk.partition("=")
            if not symbol:
                raise CliError(
                    f"bad cylinder constraint {chunk!r}, expected c1:c2=symbol", EXIT_CONFIG
                )
            coord = [int(c) for c in coords.split(":")]
            constraints.append({"coord": coord, "symbols": [int(symbol)]})
        return {"kind": "cylinder", "constraints": constraints}
    raise CliError("needs a target set: --arc or --cylinder", EXIT_CONFIG)


def cmd_kronecker(args) -> int:
    if not args.slopes:
        raise CliError("kronecker needs --slopes", EXIT_CONFIG)
    system = _system_payload(args)
    target = _set_payload(args)
    windows = _parse_windows(args.windows)
    if args.b1 or args.b2:
        if not (args.b1 and args.b2):
            raise CliError("b-independence needs both --b1 and --b2", EXIT_CONFIG)
        payload = {
            "system": system,
            "set": target,
            "slopes": _csv_list(args.slopes),
            "b1": args.b1,
            "b2": args.b2,
            "epsilon": args.epsilon[0],
            "windows": windows,
        }
        out = call(args.server, "kronecker/b-independence", payload)
        if args.json:
            _print_json(out)
        else:
            print(
                f"agree={out['agree']} (b1 -> {out['verdict_b1']}, b2 -> {out['verdict_b2']})"
            )
        return EXIT_OK
    if not args.widths:
        raise CliError("kronecker profiles need --widths", EXIT_CONFIG)
    results = []
    for eps in args.epsilon:
        payload = {
            "system": system,
            "set": target,
            "strip": _strip_payload(args),
            "epsilon": eps,
            "windows": windows,
        }
        results.append(call(args.server, "kronecker/profile", payload))
    if args.json:
        _print_json(results)
        return EXIT_OK
    for profile in results:
        sizes = ",".join(str(w["net_size"]) for w in profile["windows"])
        print(
            f"eps={profile['epsilon']}: verdict={profile['verdict']} net sizes=[{sizes}] "
            f"slope={profile['evidence']['slope_per_window']:.3f}"
        )
    return EXIT_OK


def cmd_suspension_check(args) -> int:
    payload = {
        "system": _system_payload(args),
        "suspension": {
            "beta": args.beta,
            "sample_count": args.samples,
            "max_power": args.max_power,
            "beta_trials": args.beta_trials,
        },
        "seed": args.seed,
    }
    out = call(args.server, "suspension/check", payload)
    if args.json:
        _print_json(out)
        return EXIT_OK
    coc = out["cocycle"]
    mp = out["measure_preservation"]
    print(
        f"cocycle exact for {coc['betas_checked']} beta(s) up to power {coc['max_power']}"
    )
    for check in mp["checks"]:
        print(
            f"set {check['label']}: before={check['freq_before']:.4f} "
            f"after={check['freq_after']:.4f} bound={check['bound']:.4f} "
            f"{'ok' if check['ok'] else 'FAIL'}"
        )
    print("measure preservation:", "passed" if mp["passed"] else "FAILED")
    return EXIT_OK if mp["passed"] else EXIT_ERROR


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dselab",
        description="directional-entropy and Koopman-compactness experiments",
    )
    parser.add_argument("--version", action="version", version=f"dselab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config (path or built-in name)")
    p_run.add_argument("config", help="JSON config path or built-in experiment name")
    p_run.add_argument("--out", default="out", help="artifact directory (default: out)")
    _add_server(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_list = sub.add_parser("list", help="list built-in experiments")
    p_list.add_argument("--json", action="store_true")
    _add_server(p_list)
    p_list.set_defaults(fn=cmd_list)

    p_strip = sub.add_parser("strip", help="strip membership and enumeration")
    _add_strip_args(p_strip)
    p_strip.add_argument("--points", nargs=2, type=int, metavar=("M_LO", "M_HI"))
    p_strip.add_argument("--contains", metavar="M,N")
    p_strip.add_argument("--monotone", type=int, metavar="COUNT")
    p_strip.add_argument("--stride", type=int, default=1)
    p_strip.add_argument("--start-m", type=int, default=0, dest="start_m")
    p_strip.add_argument("--json", action="store_true")
    _add_server(p_strip)
    p_strip.set_defaults(fn=cmd_strip)

    p_dec = sub.add_parser("decompose", help="split a point across two strips")
    p_dec.add_argument("--v", required=True, help="first slope, e.g. 0")
    p_dec.add_argument("--w", required=True, help="second slope, e.g. 1")
    p_dec.add_argument("--b", required=True, help="strip width, e.g. 9")
    p_dec.add_argument("--point", required=True, metavar="M,N")
    _add_server(p_dec)
    p_dec.set_defaults(fn=cmd_decompose)

    p_ent = sub.add_parser("entropy", help="entropy curves along sequences or greedy search")
    _add_system_args(p_ent)
    p_ent.add_argument("--partition", choices=["time_zero", "arcs"], default="time_zero")
    p_ent.add_argument("--cuts", help="comma-separated arc partition cuts")
    _add_strip_args(p_ent, required=False)
    p_ent.add_argument("--greedy", type=int, metavar="HORIZON")
    p_ent.add_argument("--window", type=int, default=8)
    p_ent.add_argument("--monotone", type=int, metavar="COUNT")
    p_ent.add_argument("--points-list", metavar="M,N;M,N;...", dest="points_list")
    p_ent.add_argument("--stride", type=int, default=1)
    p_ent.add_argument("--start-m", type=int, default=0, dest="start_m")
    p_ent.add_argument("--k", type=int)
    p_ent.add_argument("--tail", type=int)
    p_ent.add_argument("--log-base", type=float, dest="log_base")
    p_ent.add_argument("--json", action="store_true")
    _add_server(p_ent)
    p_ent.set_defaults(fn=cmd_entropy)

    p_kro = sub.add_parser("kronecker", help="net growth profiles and width independence")
    _add_system_args(p_kro)
    p_kro.add_argument("--arc", help="target arc set, e.g. 0,1/2 (| separate with ;)")
    p_kro.add_argument("--cylinder", help="target cylinder, e.g. 0:0=0")
    _add_strip_args(p_kro, required=False)
    p_kro.add_argument("--epsilon", type=float, nargs="+", required=True)
    p_kro.add_argument("--windows", required=True, help="lo:hi,lo:hi,...")
    p_kro.add_argument("--b1", help="first width for the independence check")
    p_kro.add_argument("--b2", help="second width for the independence check")
    p_kro.add_argument("--json", action="store_true")
    _add_server(p_kro)
    p_kro.set_defaults(fn=cmd_kronecker)

    p_sus = sub.add_parser("suspension-check", help="cocycle and invariance checks")
    _add_system_args(p_sus)
    p_sus.add_argument("--beta", required=True, help="slope of the suspended line, e.g. 5/8")
    p_sus.add_argument("--samples", type=int, default=10_000)
    p_sus.add_argument("--max-power", type=int, default=64, dest="max_power")
    p_sus.add_argument("--beta-trials", type=int, default=0, dest="beta_trials")
    p_sus.add_argument("--seed", type=int, default=0)
    p_sus.add_argument("--json", action="store_true")
    _add_server(p_sus)
    p_sus.set_defaults(fn=cmd_suspension_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        if getattr(args, "command", None) == "run":
            # machine-readable error record for batch callers
            record = {"error": {"exit_code": exc.code, "message": str(exc)}}
            print(json.dumps(record), file=_sys.stderr)
        else:
            print(f"error: {exc}", file=_sys.stderr)
        return exc.code
    except Exception as exc:  # pragma: no cover - last resort
        print(f"unexpected error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
