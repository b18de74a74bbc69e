"""
Scenario files: JSON schema, validation and conversion to runtime objects.

A minimal scenario::

    {
      "seed": 7,
      "catalog": [
        {"id": "render-server", "kind": "CaaS", "supply": [0, 0, 0, 4000]},
        {"id": "render-taas", "kind": "TaaS", "consumption": [0, 0, 0, 20]}
      ],
      "bundles": {"ARVR": ["render-taas"]},
      "arrivals": {"explicit": [{"time": 0, "kind": "ARVR", "rate": 100}]}
    }

Resource vectors are written either as ``[comm_rate, compute, storage,
rendering]`` or as an object keyed by those names. Validation errors carry
the dotted path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import jsonschema

from .catalog import Catalog, MaaSModel
from .controllers import AllocationPolicy, ScalingPolicy
from .errors import InvalidParams, ScenarioInvalid, Slicing4MetaError
from .orchestrator import DEFAULT_TEMPLATES, ServiceKind, ServiceRequirements
from .qoe import QoEParams
from .resources import DIMENSIONS, IsolationDegree, ResourceVector

__all__ = ["SCENARIO_SCHEMA", "Scenario", "ArrivalSpec", "load_scenario", "parse_scenario"]

_NONNEG = {"type": "number", "minimum": 0}

_VECTOR = {
    "oneOf": [
        {"type": "array", "items": _NONNEG, "minItems": 4, "maxItems": 4},
        {
            "type": "object",
            "properties": {d: _NONNEG for d in DIMENSIONS},
            "additionalProperties": False,
        },
    ]
}

_ISOLATION = {
    "oneOf": [
        {"type": "integer", "minimum": 0, "maximum": 3},
        {"type": "string", "pattern": "(?i)^(none|scheduling|logical|physical)$"},
    ]
}

_KIND = {"type": "string", "enum": [k.value for k in ServiceKind]}

_TEMPLATE = {
    "type": "object",
    "properties": {
        "peak_rate": _NONNEG,
        "reliability": {"type": "number", "minimum": 0, "maximum": 1},
        "max_latency": _NONNEG,
        "rendering_per_object": _NONNEG,
        "isolation": _ISOLATION,
    },
    "additionalProperties": False,
}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["seed", "catalog", "bundles"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "duration_ms": _NONNEG,
        "catalog": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"type": "string", "enum": ["CaaS", "TaaS"]},
                    "label": {"type": "string"},
                    "supply": _VECTOR,
                    "consumption": _VECTOR,
                    "children": {"type": "array", "items": {"type": "string"}},
                    "max_isolation": _ISOLATION,
                },
            },
        },
        "bundles": {
            "type": "object",
            "propertyNames": _KIND,
            "additionalProperties": {"type": "array", "items": {"type": "string"}},
        },
        "qoe": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k": {"type": "number", "exclusiveMinimum": 0},
                "c0": {"type": "number", "exclusiveMinimum": 0},
                "r_ref": {"type": "number", "exclusiveMinimum": 0},
                "per_object_capacity": {"type": "number", "exclusiveMinimum": 0},
                "readjust_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
        "orchestrator": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": _NONNEG,
                "templates": {
                    "type": "object",
                    "propertyNames": _KIND,
                    "additionalProperties": _TEMPLATE,
                },
            },
        },
        "controllers": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "policy": {"type": "string", "enum": [p.value for p in AllocationPolicy]},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "headroom": {"type": "number", "minimum": 1},
                "u_lo": {"type": "number", "minimum": 0, "maximum": 1},
                "u_hi": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "scale_step": _VECTOR,
                "epoch_ms": {"type": "number", "exclusiveMinimum": 0},
                "monitor_ms": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "users": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_objects_min": {"type": "integer", "minimum": 1},
                "n_objects_max": {"type": "integer", "minimum": 1},
            },
        },
        "arrivals": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "explicit": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["time", "kind"],
                        "additionalProperties": False,
                        "properties": {
                            "time": _NONNEG,
                            "kind": _KIND,
                            "user_id": {"type": "string"},
                            "rate": _NONNEG,
                            "bep": {"type": "number", "minimum": 0, "maximum": 1},
                            "n_objects": {"type": "integer", "minimum": 1},
                            "holding_ms": _NONNEG,
                            "overrides": _TEMPLATE,
                        },
                    },
                },
                "poisson": {
                    "type": "object",
                    "required": ["count", "mean_interarrival_ms"],
                    "additionalProperties": False,
                    "properties": {
                        "count": {"type": "integer", "minimum": 0},
                        "mean_interarrival_ms": {"type": "number", "exclusiveMinimum": 0},
                        "mean_holding_ms": {"type": "number", "exclusiveMinimum": 0},
                        "kinds": {"type": "array", "items": _KIND, "minItems": 1},
                        "rates": {"type": "array", "items": _NONNEG, "minItems": 1},
                        "bep": {"type": "number", "minimum": 0, "maximum": 1},
                    },
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft7Validator(SCENARIO_SCHEMA)


def _path(parts) -> str:
    return ".".join(str(p) for p in parts)


def _vector(raw) -> ResourceVector:
    if raw is None:
        return ResourceVector()
    if isinstance(raw, dict):
        return ResourceVector(**raw)
    return ResourceVector.from_seq(raw)


@dataclass(frozen=True)
class ArrivalSpec:
    time: float
    kind: str
    user_id: Optional[str] = None
    rate: float = 100.0
    bep: float = 0.001
    n_objects: Optional[int] = None
    holding_ms: Optional[float] = None
    overrides: Dict[str, Any] = field(default_factory=dict)


@dataclass
class Scenario:
    seed: int
    catalog: Catalog
    bundles: Dict[str, List[str]]
    qoe: QoEParams = field(default_factory=QoEParams)
    templates: Dict[ServiceKind, ServiceRequirements] = field(
        default_factory=lambda: dict(DEFAULT_TEMPLATES)
    )
    tau: float = 0.1
    policy: AllocationPolicy = AllocationPolicy.EVEN
    alpha: float = 0.3
    headroom: float = 1.2
    scaling: ScalingPolicy = field(default_factory=ScalingPolicy)
    epoch_ms: float = 1000.0
    monitor_ms: float = 100.0
    n_objects_min: int = 1
    n_objects_max: int = 56
    explicit: List[ArrivalSpec] = field(default_factory=list)
    poisson: Optional[Dict[str, Any]] = None
    duration_ms: Optional[float] = None
    name: str = ""
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)


def validate_document(doc: Any) -> None:
    """Raise ScenarioInvalid naming the first schema violation (deterministic order)."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (list(map(str, e.path)), e.message))
    if errors:
        err = errors[0]
        path = _path(err.path)
        if err.validator == "required":
            # point at the missing property itself
            missing = err.message.split("'")[1]
            path = _path(list(err.path) + [missing])
        raise ScenarioInvalid(err.message, path or "<root>")


def parse_scenario(doc: Dict[str, Any]) -> Scenario:
    validate_document(doc)

    catalog = Catalog()
    for i, entry in enumerate(doc["catalog"]):
        try:
            catalog.register_model(
                MaaSModel(
                    id=entry["id"],
                    kind=entry["kind"],
                    label=entry.get("label", ""),
                    supply=_vector(entry.get("supply")),
                    consumption=_vector(entry.get("consumption")),
                    children=tuple(entry.get("children", ())),
                    max_isolation_degree_for_sharing=entry.get("max_isolation", "logical"),
                )
            )
        except Slicing4MetaError as exc:
            raise ScenarioInvalid(f"{type(exc).__name__}: {exc}", f"catalog.{i}") from exc

    bundles = {k: list(v) for k, v in doc["bundles"].items()}
    for kind, ids in bundles.items():
        for j, model_id in enumerate(ids):
            if model_id not in catalog:
                raise ScenarioInvalid(f"unknown model {model_id!r}", f"bundles.{kind}.{j}")
            if catalog.get(model_id).kind.value != "TaaS":
                raise ScenarioInvalid(f"bundle entry {model_id!r} is not TaaS", f"bundles.{kind}.{j}")

    q = doc.get("qoe", {})
    try:
        qoe = QoEParams(**q).validate()
    except InvalidParams as exc:
        raise ScenarioInvalid(str(exc), "qoe") from exc

    orch = doc.get("orchestrator", {})
    templates = dict(DEFAULT_TEMPLATES)
    for kind, overrides in orch.get("templates", {}).items():
        base = templates[ServiceKind(kind)]
        fields = {k: v for k, v in overrides.items()}
        if "isolation" in fields:
            fields["isolation"] = IsolationDegree.parse(fields["isolation"])
        templates[ServiceKind(kind)] = replace(base, **fields)

    ctl = doc.get("controllers", {})
    try:
        scaling = ScalingPolicy(
            u_lo=ctl.get("u_lo", 0.2),
            u_hi=ctl.get("u_hi", 0.9),
            step=_vector(ctl.get("scale_step", [0, 0, 0, 200])),
        )
    except ValueError as exc:
        raise ScenarioInvalid(str(exc), "controllers") from exc

    users = doc.get("users", {})
    n_min, n_max = users.get("n_objects_min", 1), users.get("n_objects_max", 56)
    if n_min > n_max:
        raise ScenarioInvalid("n_objects_min exceeds n_objects_max", "users.n_objects_min")

    arrivals = doc.get("arrivals", {})
    explicit = []
    for i, a in enumerate(arrivals.get("explicit", [])):
        n = a.get("n_objects")
        if n is not None and not n_min <= n <= n_max:
            raise ScenarioInvalid(
                f"n_objects {n} outside [{n_min}, {n_max}]", f"arrivals.explicit.{i}.n_objects"
            )
        explicit.append(
            ArrivalSpec(
                time=a["time"],
                kind=a["kind"],
                user_id=a.get("user_id"),
                rate=a.get("rate", 100.0),
                bep=a.get("bep", 0.001),
                n_objects=n,
                holding_ms=a.get("holding_ms"),
                overrides=dict(a.get("overrides", {})),
            )
        )
    ids = [a.user_id for a in explicit if a.user_id is not None]
    if len(ids) != len(set(ids)):
        raise ScenarioInvalid("duplicate user_id", "arrivals.explicit")

    return Scenario(
        seed=doc["seed"],
        catalog=catalog,
        bundles=bundles,
        qoe=qoe,
        templates=templates,
        tau=orch.get("tau", 0.1),
        policy=AllocationPolicy(ctl.get("policy", "even")),
        alpha=ctl.get("alpha", 0.3),
        headroom=ctl.get("headroom", 1.2),
        scaling=scaling,
        epoch_ms=ctl.get("epoch_ms", 1000.0),
        monitor_ms=ctl.get("monitor_ms", 100.0),
        n_objects_min=n_min,
        n_objects_max=n_max,
        explicit=explicit,
        poisson=arrivals.get("poisson"),
        duration_ms=doc.get("duration_ms"),
        name=doc.get("name", ""),
        raw=doc,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file.

    Malformed JSON is reported as ScenarioInvalid with the parse position;
    I/O errors propagate as OSError.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioInvalid(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    return parse_scenario(doc)
