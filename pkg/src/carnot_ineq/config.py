"""Experiment configuration: schema, defaults and builders.

A config is a JSON object.  Unknown keys are rejected at every level; missing
blocks are filled from ``DEFAULTS`` and the resolved config is what reports
embed.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError
from .group import CarnotGroup, make_heisenberg, make_step_two, random_step_two
from .measures.profiles import GProfile, profile_from_dict
from .measures.quadrature import BoltzmannMeasure
from .nogo import NoGoParams

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_INT_POS = {"type": "integer", "minimum": 1}
_SEED = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


GROUP_SCHEMA = {
    "oneOf": [
        _obj({"preset": {"const": "heisenberg"}, "d": _INT_POS, "a": _POS}, ["preset"]),
        _obj(
            {
                "preset": {"const": "random"},
                "n": {"type": "integer", "minimum": 2},
                "m": _INT_POS,
                "seed": _SEED,
                "nondegenerate": {"type": "boolean"},
                "a": _POS,
            },
            ["preset", "n", "m"],
        ),
        _obj(
            {
                "lambdas": {"type": "array", "minItems": 1, "items": {"type": "array", "items": {"type": "array", "items": _NUM}}},
                "a": _POS,
                "n": _INT_POS,
                "m": _INT_POS,
            },
            ["lambdas"],
        ),
    ]
}

PROFILE_SCHEMA = {
    "oneOf": [
        _obj({"kind": {"enum": ["power", "cosh_power", "power_log"]}, "k": {"type": "number", "minimum": 1}}, ["kind", "k"]),
        _obj({"kind": {"const": "alpha_power"}, "p": {"type": "number", "minimum": 1}, "alpha": _POS}, ["kind", "p"]),
    ]
}

CONFIG_SCHEMA = _obj(
    {
        "group": GROUP_SCHEMA,
        "profile": PROFILE_SCHEMA,
        "q": {"type": "number", "minimum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "sampler": _obj(
            {"count": _INT_POS, "seed": _SEED, "step0": _POS, "proposal": {"enum": ["anisotropic", "isotropic"]}}
        ),
        "quadrature": _obj({"resolution": {"type": "integer", "minimum": 2}}),
        "norm_constants": _obj(
            {
                "sample_count": {"type": "integer", "minimum": 1000},
                "radius_range": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                "polish": {"type": "integer", "minimum": 0},
            }
        ),
        "catalog": _obj({"quadratics": {"type": "integer", "minimum": 0}, "resamples": {"type": "integer", "minimum": 0}}),
        "nogo": _obj(
            {
                "p": {"type": "number", "minimum": 1},
                "alpha": _POS,
                "q": {"type": "number", "exclusiveMinimum": 1},
                "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "t_grid": {"type": "array", "items": _POS, "minItems": 2},
                "z0": {"type": "array", "items": _NUM, "minItems": 1},
                "sample_count": {"type": "integer", "minimum": 100},
            }
        ),
    }
)

DEFAULTS = {
    "group": {"preset": "heisenberg", "d": 1, "a": 16.0},
    "profile": {"kind": "power", "k": 4},
    "q": 2.0,
    "beta": 1.0,
    "sampler": {"count": 100_000, "seed": 0, "step0": 0.5, "proposal": "anisotropic"},
    "quadrature": {"resolution": 16},
    "norm_constants": {"sample_count": 100_000, "radius_range": [0.1, 10.0], "polish": 2},
    "catalog": {"quadratics": 10, "resamples": 200},
    "nogo": {
        "p": 2.0,
        "alpha": 1.0,
        "q": 1.5,
        "beta": 1.0,
        "t_grid": [4.0, 5.0, 6.0, 8.0, 10.0, 13.0, 16.0, 20.0, 25.0, 32.0],
        "z0": None,
        "sample_count": 100_000,
    },
}

# blocks merged key by key with DEFAULTS; group and profile are replaced whole
_MERGED = ("sampler", "quadrature", "norm_constants", "catalog", "nogo")


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return raw


def resolve_config(raw: dict, seed=None, samples=None, command: str = "") -> dict:
    """Validate ``raw`` against the schema, fill defaults and apply CLI overrides."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    cfg = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key in _MERGED:
            cfg[key].update(copy.deepcopy(val))
        else:
            cfg[key] = copy.deepcopy(val)
    if seed is not None:
        cfg["sampler"]["seed"] = int(seed)
    if samples is not None:
        samples = int(samples)
        if command == "norm-constants":
            cfg["norm_constants"]["sample_count"] = samples
        elif command == "nogo":
            cfg["nogo"]["sample_count"] = samples
        else:
            cfg["sampler"]["count"] = samples
    return cfg


def build_group(spec: dict) -> CarnotGroup:
    if spec.get("preset") == "heisenberg":
        return make_heisenberg(int(spec.get("d", 1)), float(spec.get("a", 16.0)))
    if spec.get("preset") == "random":
        n, m, seed, a = int(spec["n"]), int(spec["m"]), int(spec.get("seed", 0)), float(spec.get("a", 1.0))
        if spec.get("nondegenerate", False):
            from .norm import random_nondegenerate_step_two

            return random_nondegenerate_step_two(n, m, seed, a)
        return random_step_two(n, m, seed, a)
    G = make_step_two(spec["lambdas"], float(spec.get("a", 1.0)))
    if ("n" in spec and spec["n"] != G.n) or ("m" in spec and spec["m"] != G.m):
        raise ConfigError(f"declared (n, m) does not match lambdas ({G.n}, {G.m})")
    return G


def build_profile(spec: dict) -> GProfile:
    return profile_from_dict(spec)


def build_measure(cfg: dict, G: CarnotGroup, profile: GProfile = None) -> BoltzmannMeasure:
    return BoltzmannMeasure(G, profile or build_profile(cfg["profile"]), None, int(cfg["quadrature"]["resolution"]))


def build_nogo_params(cfg: dict, G: CarnotGroup) -> NoGoParams:
    nb = cfg["nogo"]
    z0 = nb.get("z0")
    if z0 is None:
        z0 = [1.0] + [0.0] * (G.m - 1)
        nb["z0"] = z0
    return NoGoParams(float(nb["p"]), float(nb["alpha"]), float(nb["q"]), float(nb["beta"]), tuple(nb["t_grid"]), tuple(z0))
