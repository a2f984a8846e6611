"""Config loading for the command line tools.

A run is described by one JSON document.  Every section is optional
except ``schema_version``; missing fields fall back to the packaged
defaults, unknown keys are rejected outright.  The canonical hash of
the merged document (sorted keys, compact separators) is echoed in all
outputs so a result can be traced back to its exact inputs.
"""

from __future__ import annotations

import copy
import hashlib
import json
from typing import Any

import jsonschema

from . import gaussian as ga
from .budget import ChannelSpec, EprQuality, FeedforwardSpec, MeasChainSpec, epr_quality
from .kerr import TransmonSystem
from .repeater import WeakMeasSpec

SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path if path else "<root>"
        self.message = message
        super().__init__(f"{self.path}: {message}")


_NUM = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_UNIT = {"type": "number", "minimum": 0, "maximum": 1}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "seed": {"type": "integer", "minimum": 0},
        "epr": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "jpa": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "squeezed_variance": {
                            "type": "number",
                            "exclusiveMinimum": 0,
                            "exclusiveMaximum": 0.5,
                        },
                        "chi_over_k": _NONNEG,
                        "gamma_over_k": _NONNEG,
                    },
                },
                "splitter_loss_db": _NONNEG,
                "n_env": _NONNEG,
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eta_a": _UNIT,
                "eta_b": _UNIT,
                "n_va": _NONNEG,
                "n_vb": _NONNEG,
                "cable_loss_db_per_m": _NONNEG,
                "connector_loss_db": _NONNEG,
                "distance_m": _NONNEG,
                "measurement_time_s": _NONNEG,
                "group_velocity_m_per_s": {"type": "number", "exclusiveMinimum": 0},
                "optimize_attenuation": {"type": "boolean"},
            },
        },
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "g_j": {"type": "number", "minimum": 1},
                "a_j": _NONNEG,
                "g_h": {"type": "number", "minimum": 1},
                "a_h": _NONNEG,
                "n_v_alpha": _NONNEG,
                "n_v_beta": _NONNEG,
            },
        },
        "feedforward": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["digital", "analog"]},
                "eta_att": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "att_occupancy": _NONNEG,
            },
        },
        "teleport": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "alpha_t": _PAIR,
                "n_runs": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "axes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["path", "start", "stop", "count"],
                        "properties": {
                            "path": {"type": "string", "minLength": 1},
                            "start": _NUM,
                            "stop": _NUM,
                            "count": {"type": "integer", "minimum": 1},
                        },
                    },
                },
            },
        },
        "repeater": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lam": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "eta_a": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "eta_b": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "truncation": {"type": "integer", "minimum": 5},
                "gain": {"type": "number", "exclusiveMinimum": 0},
                "ancilla": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "alpha": _PAIR,
                        "p_window": _PAIR,
                        "k_dt": _NONNEG,
                        "probe_levels": {"type": "integer", "minimum": 5},
                    },
                },
            },
        },
        "kerr": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta_a": _NUM,
                "delta_b": _NUM,
                "g_a": _NONNEG,
                "g_b": _NONNEG,
                "dims": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 2},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "probe_time": {"type": "number", "exclusiveMinimum": 0},
                "n_samples": {"type": "integer", "minimum": 4},
                "residual_bound": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "epr": {"jpa": {}, "splitter_loss_db": 0.0, "n_env": 0.0},
    "channel": {
        "eta_a": 1.0,
        "eta_b": 1.0,
        "n_va": 0.0,
        "n_vb": 0.0,
        "cable_loss_db_per_m": 0.0,
        "connector_loss_db": 0.0,
        "distance_m": 0.0,
        "measurement_time_s": 0.0,
        "group_velocity_m_per_s": 2.0e8,
        "optimize_attenuation": False,
    },
    "chain": {
        "alpha": 1.0,
        "beta": 1.0,
        "g_j": 1.0,
        "a_j": 0.0,
        "g_h": 1.0,
        "a_h": 0.0,
        "n_v_alpha": 0.0,
        "n_v_beta": 0.0,
    },
    "feedforward": {"mode": "digital", "eta_att": 1.0, "att_occupancy": 0.0},
    "teleport": {"alpha_t": [0.0, 0.0], "n_runs": 1000},
    "sweep": {"axes": []},
    "repeater": {"lam": 0.5, "eta_a": 1.0, "eta_b": 1.0, "truncation": 30},
    "kerr": {
        "delta_a": 100.0,
        "delta_b": 50.0,
        "g_a": 1.0,
        "g_b": 1.0,
        "dims": [3, 4, 4],
        "residual_bound": 1e-3,
    },
}


def _deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate_config(doc: Any) -> None:
    """Raise :class:`ConfigError` naming the first offending field."""
    errors = sorted(
        jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc),
        key=jsonschema.exceptions.relevance,
    )
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        path = ".".join(str(part) for part in best.absolute_path)
        raise ConfigError(path, best.message)


def merge_defaults(doc: dict[str, Any]) -> dict[str, Any]:
    return _deep_merge(DEFAULTS, doc)


def load_config(path: str) -> dict[str, Any]:
    """Read, validate, and complete a config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError("<root>", f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    validate_config(doc)
    merged = merge_defaults(doc)
    validate_config(merged)
    return merged


def canonical_hash(cfg: dict[str, Any]) -> str:
    """First 16 hex digits of the sha256 of the canonical JSON form."""
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def jpa_from_config(cfg: dict[str, Any]) -> ga.JpaSpec:
    sec = cfg["epr"]["jpa"]
    has_var = "squeezed_variance" in sec
    has_phys = "chi_over_k" in sec or "gamma_over_k" in sec
    if has_var and has_phys:
        raise ConfigError("epr.jpa", "give either squeezed_variance or chi_over_k with gamma_over_k, not both")
    try:
        if has_var:
            return ga.JpaSpec.from_squeezed_variance(sec["squeezed_variance"])
        if has_phys:
            if "chi_over_k" not in sec or "gamma_over_k" not in sec:
                raise ConfigError("epr.jpa", "physical parameterization needs both chi_over_k and gamma_over_k")
            return ga.JpaSpec.from_physical(sec["chi_over_k"], sec["gamma_over_k"])
    except ValueError as exc:
        raise ConfigError("epr.jpa", str(exc)) from exc
    raise ConfigError("epr.jpa", "give squeezed_variance or chi_over_k with gamma_over_k")


def epr_from_config(cfg: dict[str, Any]) -> EprQuality:
    try:
        return epr_quality(jpa_from_config(cfg), cfg["epr"]["splitter_loss_db"])
    except ValueError as exc:
        raise ConfigError("epr", str(exc)) from exc


def channel_from_config(cfg: dict[str, Any]) -> ChannelSpec:
    try:
        return ChannelSpec(**cfg["channel"])
    except ValueError as exc:
        raise ConfigError("channel", str(exc)) from exc


def chain_from_config(cfg: dict[str, Any]) -> MeasChainSpec:
    try:
        return MeasChainSpec(**cfg["chain"])
    except ValueError as exc:
        raise ConfigError("chain", str(exc)) from exc


def feedforward_from_config(cfg: dict[str, Any]) -> FeedforwardSpec:
    try:
        return FeedforwardSpec(**cfg["feedforward"])
    except ValueError as exc:
        raise ConfigError("feedforward", str(exc)) from exc


def repeater_amplifier_from_config(cfg: dict[str, Any]) -> WeakMeasSpec | float:
    sec = cfg["repeater"]
    has_gain = "gain" in sec
    has_probe = "ancilla" in sec
    if has_gain == has_probe:
        raise ConfigError("repeater", "give exactly one amplifier: ancilla (weak probe) or gain (exact filter)")
    if has_gain:
        return float(sec["gain"])
    probe = sec["ancilla"]
    kwargs: dict[str, Any] = {}
    if "alpha" in probe:
        kwargs["alpha"] = complex(probe["alpha"][0], probe["alpha"][1])
    if "p_window" in probe:
        kwargs["p_window"] = tuple(probe["p_window"])
    if "k_dt" in probe:
        kwargs["k_dt"] = probe["k_dt"]
    if "probe_levels" in probe:
        kwargs["probe_levels"] = probe["probe_levels"]
    try:
        return WeakMeasSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError("repeater.ancilla", str(exc)) from exc


def system_from_config(cfg: dict[str, Any]) -> TransmonSystem:
    sec = cfg["kerr"]
    try:
        return TransmonSystem(
            delta_a=sec["delta_a"],
            delta_b=sec["delta_b"],
            g_a=sec["g_a"],
            g_b=sec["g_b"],
            dims=tuple(sec["dims"]),
        )
    except ValueError as exc:
        raise ConfigError("kerr", str(exc)) from exc


def resolve_axis_path(cfg: dict[str, Any], path: str) -> None:
    """Check a sweep axis path points at an existing numeric scalar."""
    node: Any = cfg
    parts = path.split(".")
    for depth, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            seen = ".".join(parts[: depth + 1])
            raise ConfigError("sweep.axes", f"unknown field {seen!r}")
        node = node[part]
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError("sweep.axes", f"{path!r} is not a numeric field")


def set_axis_value(cfg: dict[str, Any], path: str, value: float) -> None:
    parts = path.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value
