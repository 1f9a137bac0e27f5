"""Experiment configuration: schema-validated, losslessly round-tripping.

A config is a flat JSON object.  Unknown keys are rejected so a saved config
is an exact, auditable record of a run.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import ConfigInvalidError
from .geometry.implicit import ImplicitDomain
from .geometry.zoo import make_zoo

__all__ = ["SCENARIO_NAMES", "CONFIG_SCHEMA", "ExperimentConfig"]

SCENARIO_NAMES = (
    "verify",
    "comb-study",
    "immersion-counterexample",
    "convex-probe",
    "offset-study",
    "measure-limit",
    "ode-audit",
    "divergence-check",
)

_DOMAIN_SPEC = {
    "type": "object",
    "properties": {
        "kind": {"type": "string"},
        "params": {"type": "object"},
        "translate": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "scenario": {"enum": list(SCENARIO_NAMES)},
        "seed": {"type": "integer", "minimum": 0},
        "out_dir": {"type": "string", "minLength": 1},
        "resolution": {"type": "number", "exclusiveMinimum": 0},
        "dimension": {"enum": [2, 3]},
        "n_configs": {"type": "integer", "minimum": 1},
        "mc_samples": {"type": "integer", "minimum": 1000},
        "geometry": {
            "type": "object",
            "properties": {"d1": _DOMAIN_SPEC, "d2": _DOMAIN_SPEC},
            "required": ["d1", "d2"],
            "additionalProperties": False,
        },
        "field": {
            "type": "object",
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "object"},
            },
            "required": ["name"],
            "additionalProperties": False,
        },
        "teeth": {
            "type": "array",
            "items": {"type": "integer", "minimum": 3},
            "minItems": 1,
        },
        "etas": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 2,
        },
        "horizons": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "n_disks": {"type": "integer", "minimum": 1},
        "m_cover": {"type": "integer", "minimum": 1},
        "perturbation": {"type": "number", "minimum": 0},
        "ball_radius": {"type": "number", "exclusiveMinimum": 0},
        "grid": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 2,
            "maxItems": 2,
        },
        "allow_non_simple": {"type": "boolean"},
        "threads": {"type": "integer", "minimum": 1},
    },
    "required": ["scenario"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated scenario configuration; ``data`` is the raw JSON object."""

    data: dict

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(payload, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigInvalidError(f"invalid config: {exc.message}") from exc
        return cls(data=copy.deepcopy(payload))

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            payload = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigInvalidError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigInvalidError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigInvalidError("config must be a JSON object")
        return cls.from_dict(payload)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """New config with non-None overrides applied and re-validated."""
        merged = self.to_dict()
        for key, value in overrides.items():
            if value is not None:
                merged[key] = value
        return ExperimentConfig.from_dict(merged)

    # -- accessors with defaults ------------------------------------------

    @property
    def scenario(self) -> str:
        return self.data["scenario"]

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 0))

    @property
    def out_dir(self) -> str:
        return self.data.get("out_dir", "fluxgauge-out")

    @property
    def resolution(self) -> Optional[float]:
        value = self.data.get("resolution")
        return None if value is None else float(value)

    def get(self, key, default=None):
        return self.data.get(key, default)

    def build_domain(self, key: str) -> ImplicitDomain:
        """Instantiate a catalog domain from the geometry section."""
        spec = self.data.get("geometry", {}).get(key)
        if spec is None:
            raise ConfigInvalidError(f"geometry.{key} missing from config")
        try:
            dom = make_zoo(spec["kind"], **spec.get("params", {}))
        except Exception as exc:
            raise ConfigInvalidError(f"geometry.{key}: {exc}") from exc
        if "translate" in spec:
            dom = dom.translated(spec["translate"])
        return dom
