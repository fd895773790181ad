"""JSON run configuration: schema validation plus domain invariants.

A config describes one lattice, its polygonal regions, the propagation
constant beta and the numerical settings shared by all CLI subcommands.
Every problem is reported with a dotted path to the offending key, for
example ``regions[1].n2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from dataclasses import field as dc_field

import jsonschema
import numpy as np

from .errors import (
    ConfigInvariantError,
    ConfigSchemaError,
    ConfigSyntaxError,
    PcfBandError,
)
from .geometry import PolygonalPartition, Region
from .lattice import KPath, Lattice2D, reciprocal_lattice
from .medium import PermittivityMap

_VEC2 = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["lattice", "background_n2", "beta"],
    "anyOf": [{"required": ["cutoff"]}, {"required": ["ladder"]}],
    "properties": {
        "lattice": {
            "type": "object",
            "additionalProperties": False,
            "required": ["a1", "a2"],
            "properties": {"a1": _VEC2, "a2": _VEC2},
        },
        "background_n2": _POS,
        "regions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["polygon", "n2"],
                "properties": {
                    "polygon": {"type": "array", "items": _VEC2, "minItems": 3},
                    "n2": _POS,
                },
            },
        },
        "beta": {"type": "number"},
        "kpath": {
            "type": "object",
            "additionalProperties": False,
            "required": ["vertices"],
            "properties": {
                "vertices": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["label"],
                        "oneOf": [{"required": ["xi"]}, {"required": ["frac"]}],
                        "properties": {"label": {"type": "string"}, "xi": _VEC2, "frac": _VEC2},
                    },
                },
                "samples": {"type": "integer", "minimum": 1},
            },
        },
        "cutoff": {"type": "integer", "minimum": 0},
        "ladder": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 3},
        "bands": {"type": "integer", "minimum": 1},
        "tol": _POS,
        "out": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "field": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "k_index": {"type": "integer", "minimum": 0},
                "band": {"type": "integer", "minimum": 0},
                "grid": {"type": "integer", "minimum": 2},
            },
        },
        "validate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fields": {"type": "integer", "minimum": 1},
                "cutoff": {"type": "integer", "minimum": 1},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)

# Gamma -> X -> M -> Gamma in fractional reciprocal coordinates
DEFAULT_PATH = ((("G", (0.0, 0.0)), ("X", (0.5, 0.0)), ("M", (0.5, 0.5)), ("G", (0.0, 0.0))), 8)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass(frozen=True)
class FieldOptions:
    k_index: int = 0
    band: int = 0
    grid: int = 32


@dataclass(frozen=True)
class ValidateOptions:
    fields: int = 20
    cutoff: int = 4


@dataclass(frozen=True)
class Config:
    lattice: Lattice2D
    medium: PermittivityMap
    beta: float
    kpath: KPath
    cutoff: int | None = None
    ladder: tuple | None = None
    bands: int = 8
    tol: float = 1e-10
    out: str | None = None
    seed: int = 0
    field: FieldOptions = dc_field(default_factory=FieldOptions)
    validate: ValidateOptions = dc_field(default_factory=ValidateOptions)

    @property
    def partition(self) -> PolygonalPartition:
        return self.medium.partition

    @property
    def finest_cutoff(self) -> int:
        if self.ladder:
            return self.ladder[-1]
        return self.cutoff

    def with_overrides(self, **kw) -> "Config":
        vals = {k: getattr(self, k) for k in self.__dataclass_fields__}
        vals.update({k: v for k, v in kw.items() if v is not None})
        return Config(**vals)


def _invariant(where: str, fn, *args):
    try:
        return fn(*args)
    except (PcfBandError, ValueError) as exc:
        raise ConfigInvariantError(f"{where}: {exc}") from exc


def parse_config(text: str) -> Config:
    """Parse and validate JSON config text."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    errors = sorted(_VALIDATOR.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msg = "; ".join(f"{_path(e.absolute_path)}: {e.message}" for e in errors)
        raise ConfigSchemaError(msg)

    lat = _invariant("lattice", Lattice2D, raw["lattice"]["a1"], raw["lattice"]["a2"])
    regions = []
    for i, r in enumerate(raw.get("regions", [])):
        regions.append(_invariant(f"regions[{i}]", Region, r["polygon"], r["n2"]))
    part = _invariant("regions", PolygonalPartition, lat, tuple(regions), raw["background_n2"])

    rec = reciprocal_lattice(lat)
    kp = raw.get("kpath")
    if kp is None:
        verts, samples = DEFAULT_PATH
        labels = [v[0] for v in verts]
        xis = [rec.vectors(np.array(v[1])) for v in verts]
    else:
        samples = kp.get("samples", 8)
        labels = [v["label"] for v in kp["vertices"]]
        xis = [
            np.asarray(v["xi"], dtype=float) if "xi" in v else rec.vectors(np.asarray(v["frac"], dtype=float))
            for v in kp["vertices"]
        ]
    kpath = _invariant("kpath", KPath, tuple(tuple(x) for x in xis), tuple(labels), samples)

    ladder = raw.get("ladder")
    if ladder is not None:
        ladder = tuple(ladder)
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigInvariantError("ladder: cutoffs must be strictly increasing")
    bands = raw.get("bands", 8)
    fo = FieldOptions(**raw.get("field", {}))
    if fo.band >= bands:
        raise ConfigInvariantError(f"field.band: {fo.band} is not below bands = {bands}")
    n_k = 1 + (len(kpath.vertices) - 1) * kpath.samples
    if fo.k_index >= n_k:
        raise ConfigInvariantError(f"field.k_index: {fo.k_index} must be below the {n_k} path samples")

    return Config(
        lattice=lat,
        medium=PermittivityMap(part),
        beta=float(raw["beta"]),
        kpath=kpath,
        cutoff=raw.get("cutoff"),
        ladder=ladder,
        bands=bands,
        tol=float(raw.get("tol", 1e-10)),
        out=raw.get("out"),
        seed=raw.get("seed", 0),
        field=fo,
        validate=ValidateOptions(**raw.get("validate", {})),
    )


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigSyntaxError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigSyntaxError(f"{path} is not UTF-8: {exc}") from exc
    return parse_config(text)
