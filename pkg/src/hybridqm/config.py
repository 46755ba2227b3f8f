"""Scenario configuration: YAML loading, schema validation and fingerprints.

A config is a mapping::

    scenario: spectrum
    seed: 0                 # optional
    panels:
      a: {kind: flux_sweep, qubit: {...}, flux: {start: 0, stop: 1, points: 201}}

Each panel is validated against the schema of its ``kind`` before any
numerics run. Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
import yaml

from .circuits import FluxoniumParams, TransmonParams
from .errors import ValidationError

SCENARIOS = (
    "spectrum",
    "avoided",
    "dispersive",
    "rabi",
    "modesplit",
    "numbersplit",
    "encode",
    "cat",
    "force",
    "transduce",
    "cool",
)
TOP_LEVEL_KEYS = {"scenario", "seed", "panels", "description"}


# --- field parsers ------------------------------------------------------------


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{path}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(f"{path}: must be finite")
    return v


def real(value, path):
    return _number(value, path)


def positive(value, path):
    v = _number(value, path)
    if v <= 0:
        raise ValidationError(f"{path}: must be > 0, got {v}")
    return v


def nonneg(value, path):
    v = _number(value, path)
    if v < 0:
        raise ValidationError(f"{path}: must be >= 0, got {v}")
    return v


def integer(minimum: int):
    def parse(value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{path}: expected an integer, got {value!r}")
        if value < minimum:
            raise ValidationError(f"{path}: must be >= {minimum}, got {value}")
        return value

    return parse


def boolean(value, path):
    if not isinstance(value, bool):
        raise ValidationError(f"{path}: expected true/false, got {value!r}")
    return value


def choice(*options):
    def parse(value, path):
        if value not in options:
            raise ValidationError(f"{path}: must be one of {list(options)}, got {value!r}")
        return value

    return parse


def number_list(value, path):
    if not isinstance(value, list) or not value:
        raise ValidationError(f"{path}: expected a non-empty list of numbers")
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])


def grid(value, path):
    """``{start, stop, points}`` or an explicit list."""
    if isinstance(value, list):
        return number_list(value, path)
    if not isinstance(value, Mapping):
        raise ValidationError(f"{path}: expected {{start, stop, points}} or a list")
    sub = parse_fields(value, {"start": (real, True, None), "stop": (real, True, None), "points": (integer(2), True, None)}, path)
    if sub["stop"] <= sub["start"]:
        raise ValidationError(f"{path}: stop must exceed start")
    return np.linspace(sub["start"], sub["stop"], sub["points"])


def time_grid(value, path):
    from .dynamics import TimeGrid

    sub = parse_fields(value, {"t0": (real, False, 0.0), "t1": (positive, True, None), "steps": (integer(2), True, None)}, path)
    try:
        return TimeGrid(sub["t0"], sub["t1"], sub["steps"])
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


QUBIT_FIELDS = {
    "transmon": {
        "type": (str, True, None),
        "e_j1": (positive, False, None),
        "e_j2": (nonneg, False, None),
        "e_j_max": (positive, False, None),
        "e_c": (positive, True, None),
        "n_charge": (integer(5), False, 20),
    },
    "fluxonium": {
        "type": (str, True, None),
        "e_j": (positive, True, None),
        "e_c": (positive, True, None),
        "e_l": (positive, True, None),
        "n_fock": (integer(10), False, 60),
    },
}


def qubit(value, path):
    """Transmon (``e_j1`` + ``e_j2`` or symmetric ``e_j_max``) or fluxonium."""
    if not isinstance(value, Mapping):
        raise ValidationError(f"{path}: expected a mapping")
    kind = value.get("type")
    if kind not in QUBIT_FIELDS:
        raise ValidationError(f"{path}.type: must be one of {sorted(QUBIT_FIELDS)}, got {kind!r}")
    f = parse_fields(value, QUBIT_FIELDS[kind], path)
    if kind == "fluxonium":
        return FluxoniumParams(f["e_j"], f["e_c"], f["e_l"], f["n_fock"])
    if f["e_j_max"] is not None:
        if f["e_j1"] is not None or f["e_j2"] is not None:
            raise ValidationError(f"{path}: give either e_j_max or e_j1/e_j2, not both")
        return TransmonParams(f["e_j_max"] / 2, f["e_j_max"] / 2, f["e_c"], f["n_charge"])
    if f["e_j1"] is None or f["e_j2"] is None:
        raise ValidationError(f"{path}: missing required field 'e_j1'/'e_j2' (or 'e_j_max')")
    return TransmonParams(f["e_j1"], f["e_j2"], f["e_c"], f["n_charge"])


Parser = Callable[[Any, str], Any]
FieldSpec = dict  # name -> (parser, required, default)


def parse_fields(raw: Mapping, spec: FieldSpec, path: str) -> dict:
    if not isinstance(raw, Mapping):
        raise ValidationError(f"{path}: expected a mapping")
    unknown = sorted(set(raw) - set(spec))
    if unknown:
        raise ValidationError(f"{path}: unknown key(s) {unknown}")
    out = {}
    for name, (parser, required, default) in spec.items():
        if name not in raw:
            if required:
                raise ValidationError(f"{path}: missing required field '{name}'")
            out[name] = default
            continue
        if parser is str:
            if not isinstance(raw[name], str):
                raise ValidationError(f"{path}.{name}: expected a string")
            out[name] = raw[name]
        else:
            out[name] = parser(raw[name], f"{path}.{name}")
    return out


# --- documents -------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int
    panels: dict  # name -> (kind, parsed fields)
    raw: dict

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.raw)


def canonical(raw: Mapping) -> str:
    doc = {k: v for k, v in raw.items() if k != "description"}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), default=repr)


def fingerprint(raw: Mapping) -> str:
    return hashlib.sha256(canonical(raw).encode()).hexdigest()


def load_yaml(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: invalid YAML ({exc})") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be a mapping")
    return doc


def validate(doc: Mapping) -> ScenarioConfig:
    from .scenarios import KINDS, SCENARIO_KINDS

    unknown = sorted(set(doc) - TOP_LEVEL_KEYS)
    if unknown:
        raise ValidationError(f"config: unknown key(s) {unknown}")
    scenario = doc.get("scenario")
    if scenario not in SCENARIOS:
        raise ValidationError(f"config.scenario: must be one of {list(SCENARIOS)}, got {scenario!r}")
    seed = integer(0)(doc.get("seed", 0), "config.seed")
    panels_raw = doc.get("panels")
    if not isinstance(panels_raw, Mapping) or not panels_raw:
        raise ValidationError("config: missing required field 'panels' (non-empty mapping)")
    panels = {}
    for name, body in panels_raw.items():
        path = f"panels.{name}"
        if not isinstance(name, str) or not name.replace("_", "").isalnum():
            raise ValidationError(f"{path}: panel names must be alphanumeric")
        if not isinstance(body, Mapping):
            raise ValidationError(f"{path}: expected a mapping")
        allowed = SCENARIO_KINDS[scenario]
        kind = body.get("kind", allowed[0])
        if kind not in allowed:
            raise ValidationError(f"{path}.kind: scenario {scenario!r} allows {list(allowed)}, got {kind!r}")
        spec = dict(KINDS[kind].fields)
        spec["kind"] = (str, False, kind)
        fields = parse_fields(body, spec, path)
        if KINDS[kind].check is not None:
            KINDS[kind].check(fields, path)
        panels[name] = (kind, fields)
    return ScenarioConfig(scenario, seed, panels, dict(doc))


def load_config(path) -> ScenarioConfig:
    return validate(load_yaml(path))
