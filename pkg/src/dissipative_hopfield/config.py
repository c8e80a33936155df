"""Run configuration: JSON schema, validation and the parsed RunConfig."""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field

import jsonschema

from .errors import SchemaViolation
from .model import MediumParams, SwitchingProfile, profile_from_dict, validate_params

SCENARIOS = (
    "dispersion",
    "bands",
    "spectrum",
    "yield-sweep",
    "exact-vs-perturbative",
    "correlation-map",
    "sudden-switch",
    "oracle-compare",
)

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_posgrid = {"type": "array", "items": _pos, "minItems": 1}

_PROFILE = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["lorentzian", "gaussian", "step", "window", "sampled", "zero"]},
        "G0": _nonneg,
        "tau": _pos,
        "t_on": {"type": "number"},
        "t_off": {"type": "number"},
        "ramp": _nonneg,
        "csv": {"type": "string"},
        "times": {"type": "array", "items": {"type": "number"}},
        "values": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"type": {"enum": ["lorentzian", "gaussian"]}}},
         "then": {"required": ["G0", "tau"]}},
        {"if": {"properties": {"type": {"const": "step"}}}, "then": {"required": ["G0"]}},
        {"if": {"properties": {"type": {"const": "window"}}}, "then": {"required": ["G0", "t_on", "t_off"]}},
    ],
}

_NUMERICS = {
    "type": "object",
    "properties": {
        "omega_min": _pos,
        "omega_max": _pos,
        "d_omega": _pos,
        "k": {"type": "number"},
        "k_grid": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "k_max": _pos,
        "n_k": {"type": "integer", "minimum": 2},
        "band": {"enum": ["-", "+"]},
        "kappa_cutoff": _pos,
        "n_kappa": {"type": "integer", "minimum": 5},
        "Lambda": _posgrid,
        "tol": {"type": "number", "minimum": 1e-12, "maximum": 1e-6},
        "rtol": _pos,
        "t": _pos,
        "times": _posgrid,
        "dx_step": _pos,
        "y_step": _pos,
        "t_span": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "dy": _posgrid,
        "linearize_lower_band": {"type": "boolean"},
        "exact": {"type": "boolean"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "dissipative-hopfield run configuration",
    "type": "object",
    "required": ["scenario", "medium"],
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "medium": {
            "type": "object",
            "required": ["omega", "g"],
            "properties": {"omega": _pos, "g": _nonneg},
            "additionalProperties": False,
        },
        "G0": _nonneg,
        "profile": _PROFILE,
        "sweep": {
            "type": "object",
            "properties": {"G0": _posgrid, "tau": _posgrid},
            "additionalProperties": False,
        },
        "numerics": _NUMERICS,
        "output": {
            "type": "object",
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"scenario": {"const": "dispersion"}}}, "then": {"required": ["G0"]}},
        {
            "if": {"properties": {"scenario": {"enum": [
                "spectrum", "yield-sweep", "exact-vs-perturbative", "correlation-map", "oracle-compare"]}}},
            "then": {"required": ["profile"]},
        },
        {"if": {"properties": {"scenario": {"const": "sudden-switch"}}}, "then": {"required": ["G0"]}},
    ],
}


def _pointer(path):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _violations(doc):
    validator = jsonschema.Draft7Validator(SCHEMA)
    out = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        path = list(err.absolute_path)
        if err.validator == "required":
            missing = [r for r in err.validator_value if isinstance(err.instance, dict) and r not in err.instance]
            for name in missing:
                out.append((_pointer(path + [name]), f"required property {name!r} is missing", "required"))
        elif err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            for name in extra:
                out.append((_pointer(path + [name]), f"unknown key {name!r}", "additionalProperties"))
        else:
            out.append((_pointer(path), err.message, err.validator))
    return out


def _strip_unknown(doc, schema):
    if not isinstance(doc, dict) or schema.get("type") != "object":
        return doc
    props = schema.get("properties", {})
    out = {}
    for k, v in doc.items():
        if k in props:
            out[k] = _strip_unknown(v, props[k])
        elif schema.get("additionalProperties", True) is not False:
            out[k] = v
    return out


@dataclass
class RunConfig:
    scenario: str
    medium: MediumParams
    G0: float | None = None
    profile: SwitchingProfile | None = None
    sweep: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def sweep_points(self):
        """(G0, tau) pairs of a yield sweep; missing axes fall back to the profile's values."""
        prof = self.profile.to_dict() if self.profile is not None else {}
        g0s = self.sweep.get("G0") or [prof.get("G0", self.G0)]
        taus = self.sweep.get("tau") or [prof.get("tau")]
        return [(float(a), None if b is None else float(b)) for a, b in itertools.product(g0s, taus)]

    def canonical_json(self):
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))


def parse_config_dict(doc, strict=True) -> RunConfig:
    """Validate a config document; unknown keys raise (strict) or warn and are dropped (lax)."""
    if not isinstance(doc, dict):
        raise SchemaViolation("", "config must be a JSON object")
    problems = _violations(doc)
    fatal = [p for p in problems if strict or p[2] != "additionalProperties"]
    if fatal:
        ptr, msg, _ = fatal[0]
        raise SchemaViolation(ptr, msg)
    for ptr, msg, _ in problems:
        warnings.warn(f"{ptr}: {msg} (ignored)", UserWarning, stacklevel=2)
    if problems:
        doc = _strip_unknown(doc, SCHEMA)
    try:
        medium = validate_params(doc["medium"])
    except ValueError as exc:
        raise SchemaViolation("/medium", str(exc)) from exc
    profile = None
    if "profile" in doc:
        try:
            profile = profile_from_dict(doc["profile"])
        except (ValueError, OSError) as exc:
            raise SchemaViolation("/profile", str(exc)) from exc
    return RunConfig(
        scenario=doc["scenario"],
        medium=medium,
        G0=doc.get("G0"),
        profile=profile,
        sweep=dict(doc.get("sweep", {})),
        numerics=dict(doc.get("numerics", {})),
        output=dict(doc.get("output", {})),
        raw=doc,
    )


def parse_config(path, strict=True) -> RunConfig:
    """Read and validate a UTF-8 JSON config file."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaViolation("", f"invalid JSON: {exc}") from exc
    return parse_config_dict(doc, strict=strict)
