"""Experiment configuration: schema, defaults, and object builders."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .diophantine import construct_liouville, parse_alpha
from .errors import ConfigError
from .regularity import CoefficientField
from .spectral import EigenvalueSequence, GrowthCertificate, WeylModel, generate_weyl
from .torus import PeriodicFunction, bump

FUNCTION_LITERAL_SCHEMA = {
    "type": "object",
    "properties": {
        "trig": {"type": "array",
                 "items": {"type": "array", "minItems": 3, "maxItems": 3,
                           "items": {"type": "number"}}},
        "samples": {"type": "array", "items": {"type": "number"}},
        "builder": {"enum": ["bump", "const", "exp_of_trig"]},
        "support": {"type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "number"}},
        "plateau": {"type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "number"}},
        "value": {"type": "array", "minItems": 2, "maxItems": 2,
                  "items": {"type": "number"}},
        "grid": {"type": "integer", "minimum": 8},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "spectrum": {
            "type": "object",
            "properties": {
                "weyl": {
                    "type": "object",
                    "properties": {
                        "m": {"type": "number", "exclusiveMinimum": 0},
                        "mu": {"type": "number", "exclusiveMinimum": 0},
                        "d": {"type": "integer", "minimum": 1},
                        "scale": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "required": ["m", "mu", "d"],
                    "additionalProperties": False,
                },
                "values": {"type": "array", "items": {"type": "number"}},
                "J": {"type": "integer", "minimum": 1},
                "kernel_dim": {"type": "integer", "minimum": 0},
                "growth": {"type": "array", "minItems": 4, "maxItems": 4,
                           "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
        "operator": {
            "type": "object",
            "properties": {
                "omega": {"type": "array", "minItems": 2, "maxItems": 2,
                          "items": {"type": "number"}},
                "c": FUNCTION_LITERAL_SCHEMA,
            },
            "additionalProperties": False,
        },
        "data": {
            "type": "object",
            "properties": {
                "generator": {"enum": ["exp_decay", "power_decay", "unit"]},
                "rate": {"type": "number"},
                "power": {"type": "number"},
                "profile": FUNCTION_LITERAL_SCHEMA,
            },
            "additionalProperties": False,
        },
        "diophantine": {
            "type": "object",
            "properties": {
                "alpha": {"type": ["string", "number"]},
                "epsilons": {"type": "array", "items": {"type": "number"}},
                "J": {"type": "integer", "minimum": 1},
                "probes": {"type": "array", "items": {"type": "integer"}},
                "liouville_depth": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "truncations": {
            "type": "object",
            "properties": {
                "J": {"type": "integer", "minimum": 1},
                "M_max": {"type": "integer", "minimum": 0},
                "gamma_max": {"type": "integer", "minimum": 0},
                "Mprime_max": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "numeric": {
            "type": "object",
            "properties": {
                "panels": {"type": ["integer", "null"], "minimum": 1},
                "n_out": {"type": ["integer", "null"], "minimum": 16},
                "n_grid": {"type": "integer", "minimum": 64},
                "resonance_tol": {"type": "number", "minimum": 0},
                "residual_tol": {"type": "number", "exclusiveMinimum": 0},
                "precision_digits": {"type": "integer", "minimum": 1},
                "formula": {"enum": ["auto", "backward", "forward", "divisor"]},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {
                "formats": {"type": "array", "items": {"enum": ["json", "csv"]}},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

DEFAULTS = {
    "spectrum": {"weyl": {"m": 2, "mu": 1, "d": 1, "scale": 1.0}, "J": 50, "kernel_dim": 0},
    "data": {"generator": "exp_decay", "rate": 1.0,
             "profile": {"builder": "const", "value": [1.0, 0.0]}},
    "diophantine": {"epsilons": [0.5, 1.0, 2.0, 4.0]},
    "truncations": {"J": 30, "M_max": 6, "gamma_max": 6, "Mprime_max": 4},
    "numeric": {"panels": None, "n_out": None, "n_grid": 4096,
                "resonance_tol": 1e-10, "residual_tol": 1e-8,
                "precision_digits": 15, "formula": "auto"},
    "outputs": {"formats": ["json", "csv"]},
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None, overrides: list[str] | None = None,
                precision: int | None = None) -> dict:
    """Load, override (--set key=value), default-fill, and validate a config."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {key!r} crosses a non-object")
        node[parts[-1]] = value
    if precision is not None:
        raw.setdefault("numeric", {})["precision_digits"] = precision

    config = _deep_merge(DEFAULTS, raw)
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: e.json_path)
    if errors:
        err = errors[0]
        raise ConfigError(f"config invalid at {err.json_path}: {err.message}",
                          pointer=err.json_path)
    return config


# ---------------------------------------------------------------- builders

def build_function(literal: dict) -> PeriodicFunction:
    """Realize a function literal from the config vocabulary."""
    if "trig" in literal and "builder" not in literal:
        return PeriodicFunction.from_coeffs(
            {int(f): complex(re, im) for f, re, im in literal["trig"]})
    if "samples" in literal:
        return PeriodicFunction.from_samples(np.asarray(literal["samples"], dtype=float))
    builder = literal.get("builder")
    if builder == "const":
        re, im = literal.get("value", [0.0, 0.0])
        return PeriodicFunction.const(complex(re, im))
    if builder == "bump":
        return bump(tuple(literal["support"]), tuple(literal["plateau"]),
                    n_grid=literal.get("grid", 4096))
    if builder == "exp_of_trig":
        inner = PeriodicFunction.from_coeffs(
            {int(f): complex(re, im) for f, re, im in literal["trig"]})
        n = literal.get("grid", 4096)
        return PeriodicFunction.from_callable(lambda t: np.exp(inner(t)), n)
    raise ConfigError(f"unrecognized function literal: {literal}")


def build_spectrum(section: dict) -> EigenvalueSequence:
    if "values" in section:
        growth = section.get("growth")
        return EigenvalueSequence(
            values=np.asarray(section["values"], dtype=float),
            kernel_dim=section.get("kernel_dim", 0),
            growth=GrowthCertificate(*growth) if growth else None)
    weyl = section["weyl"]
    model = WeylModel(m=weyl["m"], mu=weyl["mu"], d=weyl["d"],
                      scale=weyl.get("scale", 1.0))
    return generate_weyl(model, section.get("J", 50),
                         kernel_dim=section.get("kernel_dim", 0))


def build_operator(section: dict, spectrum: EigenvalueSequence):
    from .engine import OperatorSpec

    if "omega" in section:
        re, im = section["omega"]
        return OperatorSpec.constant(complex(re, im), spectrum)
    if "c" in section:
        return OperatorSpec.variable(build_function(section["c"]), spectrum)
    raise ConfigError("operator section needs 'omega' or 'c'")


def build_data_field(section: dict, spectrum: EigenvalueSequence, J: int) -> CoefficientField:
    profile = build_function(section.get("profile", {"builder": "const", "value": [1.0, 0.0]}))
    generator = section.get("generator", "exp_decay")
    if generator == "exp_decay":
        rate = section.get("rate", 1.0)
        return CoefficientField.from_generator(
            spectrum, J, lambda j, lam: profile * math.exp(-rate * j))
    if generator == "power_decay":
        power = section.get("power", 3.0)
        return CoefficientField.from_generator(
            spectrum, J, lambda j, lam: profile * float(j) ** (-power))
    if generator == "unit":
        return CoefficientField.from_generator(spectrum, J, lambda j, lam: profile)
    raise ConfigError(f"unknown data generator {generator!r}")


def resolve_alpha(section: dict, precision_digits: int):
    """Alpha plus optional probe indices from the diophantine section."""
    if "liouville_depth" in section:
        construction = construct_liouville(section["liouville_depth"])
        return (construction.alpha, f"liouville:{section['liouville_depth']}",
                construction.probe_indices())
    if "alpha" not in section:
        raise ConfigError("diophantine section needs 'alpha' or 'liouville_depth'")
    alpha, label = parse_alpha(section["alpha"], precision_digits)
    probes = section.get("probes")
    if isinstance(alpha, str) and alpha.startswith("liouville:"):
        pass
    if str(section["alpha"]).startswith("liouville:") and probes is None:
        depth = int(str(section["alpha"]).split(":", 1)[1])
        probes = construct_liouville(depth).probe_indices()
    return alpha, label, probes
