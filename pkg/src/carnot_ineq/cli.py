"""Command-line experiment runner.

    carnot-ineq <command> <config.json> [--seed N] [--out DIR] [--samples N] [--format json|csv]

Commands: validate-group, norm-constants, poincare, ubound, logsobolev, nogo.
Exit codes: 0 success, 2 validation failure, 3 runtime failure.  Reports are
deterministic functions of the resolved config; only the file name carries a
timestamp.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import build_group, build_measure, build_nogo_params, build_profile, load_config, resolve_config
from .errors import CarnotError, ValidationError
from .group import validate
from .inequality.catalog import run_catalog
from .measures.conditions import check_theorem11_conditions
from .measures.sampler import mcmc_sample
from .nogo import run_nogo
from .norm import estimate_lemma2_constants

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3
COMMANDS = ("validate-group", "norm-constants", "poincare", "ubound", "logsobolev", "nogo")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# commands return (result dict, warnings list, csv tables {suffix: text})


def cmd_validate_group(cfg: dict):
    spec = cfg["group"]
    G = build_group(spec)  # raises the specific validation error
    report = validate(G.lambdas, G.a)
    result = {
        "valid": report.valid,
        "skew_ok": report.skew_ok,
        "independent_ok": report.independent_ok,
        "dims_ok": report.dims_ok,
        "max_skew_defect": report.max_skew_defect,
        "singular_values": list(report.singular_values),
        "htype": report.flags.htype,
        "orthogonal": report.flags.orthogonal,
        "anticommuting": report.flags.anticommuting,
        "n": G.n,
        "m": G.m,
        "Q": G.q_hom,
        "a": G.a,
    }
    return result, [], {}


def cmd_norm_constants(cfg: dict):
    G = build_group(cfg["group"])
    nc = cfg["norm_constants"]
    rep = estimate_lemma2_constants(
        G, int(nc["sample_count"]), int(cfg["sampler"]["seed"]), tuple(nc["radius_range"]), int(nc["polish"])
    )
    warnings = []
    if rep.residual_max > 1e-12:
        warnings.append(f"radial identity residual {rep.residual_max:.3g} exceeds 1e-12")
    if not rep.a_hat > 0:
        warnings.append("a_hat is not positive: the horizontal part of the norm gradient degenerates")
    result = rep.to_dict()
    result["htype"] = G.flags.htype
    return result, warnings, {}


def _condition_warnings(command: str, cond) -> list:
    if command in ("poincare", "ubound"):
        names = ("theorem1_ok", "eta_unbounded")
    else:
        names = ("theorem1_ok", "t11_gprime_increasing", "t11_g_power_bound", "t11_gpp_bound")
    return [f"{name}=false" for name in names if not getattr(cond, name)]


def cmd_catalog(command: str, cfg: dict):
    G = build_group(cfg["group"])
    profile = build_profile(cfg["profile"])
    measure = build_measure(cfg, G, profile)
    cond = check_theorem11_conditions(profile, float(cfg["beta"]))
    warnings = _condition_warnings(command, cond)
    s = cfg["sampler"]
    chain = mcmc_sample(measure, int(s["count"]), int(s["seed"]), float(s["step0"]), s["proposal"])
    from .inequality.functions import apply_exterior_cutoff, base_catalog

    funcs = base_catalog(G, int(s["seed"]), int(cfg["catalog"]["quadratics"]))
    if command == "ubound":
        funcs = [apply_exterior_cutoff(f, G) for f in funcs]
    report = run_catalog(
        measure,
        float(cfg["q"]),
        command,
        chain=chain,
        seed=int(s["seed"]),
        beta=float(cfg["beta"]),
        functions=funcs,
        resamples=int(cfg["catalog"]["resamples"]),
    )
    result = {"conditions": cond.to_dict(), "inequality": report.to_dict(), "measure": measure.to_dict()}
    return result, warnings, {"rows": report.to_csv()}


def cmd_nogo(cfg: dict):
    G = build_group(cfg["group"])
    params = build_nogo_params(cfg, G)
    from .measures.profiles import GProfile
    from .measures.quadrature import BoltzmannMeasure

    measure = BoltzmannMeasure(G, GProfile.alpha_power(params.p, params.alpha), None, int(cfg["quadrature"]["resolution"]))
    res = run_nogo(G, measure, params, int(cfg["nogo"]["sample_count"]), int(cfg["sampler"]["seed"]))
    return res.to_dict(), list(res.warnings), {"rows": res.to_csv()}


def run_command(command: str, cfg: dict):
    if command == "validate-group":
        return cmd_validate_group(cfg)
    if command == "norm-constants":
        return cmd_norm_constants(cfg)
    if command in ("poincare", "ubound", "logsobolev"):
        return cmd_catalog(command, cfg)
    if command == "nogo":
        return cmd_nogo(cfg)
    raise ValueError(command)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="carnot-ineq", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="reports")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")


def _envelope(command, cfg, status, result=None, warnings=(), reason=None, message=None) -> dict:
    env = {"command": command, "version": __version__, "config": cfg, "status": status, "warnings": list(warnings)}
    if result is not None:
        env["result"] = result
    if reason is not None:
        env["reason"] = reason
        env["message"] = message
    return env


def write_report(out: Path, command: str, envelope: dict, tables: dict, fmt: str, stamp: Optional[str] = None) -> list:
    stamp = stamp or _timestamp()
    stem = out / f"{command}-{stamp}"
    written = []
    if fmt == "json":
        env = dict(envelope)
        if tables:
            env["tables"] = tables
        atomic_write(stem.with_suffix(".json"), dumps(env))
        written.append(stem.with_suffix(".json"))
    else:
        env = dict(envelope)
        # file names carry the timestamp, so the report names tables by suffix only
        env["tables"] = {k: {"file_suffix": f"-{k}.csv", "header": text.split("\n", 1)[0]} for k, text in tables.items()}
        atomic_write(stem.with_suffix(".json"), dumps(env))
        written.append(stem.with_suffix(".json"))
        for k, text in tables.items():
            path = out / f"{stem.name}-{k}.csv"
            atomic_write(path, text)
            written.append(path)
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    out = Path(args.out)
    cfg = None
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        cfg = resolve_config(load_config(args.config), args.seed, args.samples, command)
        result, warnings, tables = run_command(command, cfg)
    except ValidationError as exc:
        env = _envelope(command, cfg, "error", reason=exc.reason, message=str(exc))
        sys.stdout.write(dumps(env))
        if command == "validate-group" and cfg is not None:
            write_report(out, command, env, {}, args.format)
        return EXIT_VALIDATION
    except CarnotError as exc:
        sys.stdout.write(dumps(_envelope(command, cfg, "error", reason=exc.reason, message=str(exc))))
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001  internal failure still gets an exit code
        sys.stdout.write(dumps(_envelope(command, cfg, "error", reason=type(exc).__name__, message=str(exc))))
        return EXIT_RUNTIME
    env = _envelope(command, cfg, "ok", result, warnings)
    paths = write_report(out, command, env, tables, args.format)
    sys.stdout.write(dumps({"status": "ok", "command": command, "files": [str(p) for p in paths], "warnings": warnings}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
