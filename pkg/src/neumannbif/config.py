"""Versioned JSON run configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import ConfigError, DomainError

SCHEMA_VERSION = 1

_number = {"type": "number"}
_matrix = {"type": "array", "minItems": 1, "maxItems": 64,
           "items": {"type": "array", "minItems": 1, "maxItems": 64, "items": _number}}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "dimension_N", "lambda_range"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "dimension_N": {"type": "integer", "minimum": 2, "maximum": 50},
        "matrix_A": _matrix,
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["radial", "quadratic"]},
                "f_coefficients": {"type": "array", "minItems": 3, "items": _number},
                "r0": {"type": "number", "exclusiveMinimum": 0},
                "A": {**_matrix, "maxItems": 4},
                "u0": {"type": "array", "items": _number},
                "remainder": {"type": "array", "items": {
                    "type": "object", "additionalProperties": False,
                    "required": ["coefficient", "powers"],
                    "properties": {"coefficient": _number,
                                   "powers": {"type": "array", "items": {"type": "integer", "minimum": 0}}}}},
            },
        },
        "lambda_range": {"type": "array", "minItems": 2, "maxItems": 2, "items": _number},
        "cutoffs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "l_max": {"type": "integer", "minimum": 1, "maximum": 12},
                "m_max": {"type": "integer", "minimum": 1, "maximum": 12},
                "beta_max": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "coincidence": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-3},
                "trivial_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "ds_initial": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.1},
                "ds_max": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.1},
                "branch_points": {"type": "integer", "minimum": 10, "maximum": 200},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "format": {"enum": ["csv", "json"]},
                "path": {"type": "string"},
                "states": {"type": "boolean"},
                "svg": {"type": "string"},
                "branches": {"type": "string"},
            },
        },
    },
}


@dataclass
class RunConfig:
    dimension_N: int
    lambda_range: tuple[float, float]
    matrix_A: Optional[np.ndarray] = None
    model: Optional[dict] = None
    l_max: int = 8
    m_max: int = 8
    beta_max: Optional[float] = None
    tolerances: dict = field(default_factory=dict)
    output_format: str = "csv"
    output_path: Optional[str] = None
    write_states: bool = False
    svg_path: Optional[str] = None
    branches_path: Optional[str] = None
    base_dir: Path = Path(".")

    def resolve(self, path: Optional[str]) -> Optional[Path]:
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def coupling_matrix(self) -> np.ndarray:
        if self.matrix_A is not None:
            return self.matrix_A
        return self.build_model().hessian_at_u0()

    def build_model(self):
        from .galerkin.model import ModelPotential

        if self.model is None:
            raise ConfigError("model", "this command needs a model section")
        spec = self.model
        try:
            if spec["kind"] == "radial":
                return ModelPotential.radial(spec["f_coefficients"], spec["r0"])
            rem = [(t["coefficient"], t["powers"]) for t in spec.get("remainder", [])]
            return ModelPotential.quadratic(spec["A"], spec.get("u0"), rem)
        except (DomainError, ValueError) as exc:
            raise ConfigError("model", str(exc)) from exc


def _field_name(error: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in error.absolute_path)
    if error.validator == "additionalProperties":
        extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
        return ".".join(filter(None, [path, extra[0] if extra else ""]))
    if error.validator == "required":
        missing = error.message.split("'")[1] if "'" in error.message else ""
        return ".".join(filter(None, [path, missing]))
    return path or "<root>"


def parse_config(document: dict, base_dir: Path = Path(".")) -> RunConfig:
    """Validate a decoded configuration document; raises ConfigError naming the field."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise ConfigError(_field_name(first), first.message)
    has_a, has_model = "matrix_A" in document, "model" in document
    if has_a == has_model:
        raise ConfigError("matrix_A", "exactly one of matrix_A and model must be given")
    lo, hi = document["lambda_range"]
    if not lo < hi:
        raise ConfigError("lambda_range", f"need lo < hi, got [{lo}, {hi}]")
    a = None
    if has_a:
        a = np.asarray(document["matrix_A"], dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ConfigError("matrix_A", "must be a square matrix")
        if np.abs(a - a.T).max() > 1e-12:
            raise ConfigError("matrix_A", "must be symmetric")
    model = document.get("model")
    if model is not None:
        if "kind" not in model:
            raise ConfigError("model.kind", "missing")
        needed = ("f_coefficients", "r0") if model["kind"] == "radial" else ("A",)
        for key in needed:
            if key not in model:
                raise ConfigError(f"model.{key}", "missing")
        if model["kind"] == "radial" and document["dimension_N"] != 2:
            raise ConfigError("dimension_N", "a radial model lives on the disk, N must be 2")
    cut = document.get("cutoffs", {})
    out = document.get("output", {})
    cfg = RunConfig(
        dimension_N=document["dimension_N"], lambda_range=(float(lo), float(hi)), matrix_A=a, model=model,
        l_max=cut.get("l_max", 8), m_max=cut.get("m_max", 8), beta_max=cut.get("beta_max"),
        tolerances=dict(document.get("tolerances", {})), output_format=out.get("format", "csv"),
        output_path=out.get("path"), write_states=out.get("states", False), svg_path=out.get("svg"),
        branches_path=out.get("branches"), base_dir=base_dir,
    )
    if model is not None:
        cfg.build_model()  # surface model errors as configuration errors
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {p}: {exc.strerror}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    return parse_config(document, p.parent)

