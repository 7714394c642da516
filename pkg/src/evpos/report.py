"""Canonical JSON for analysis reports and operators.

Floats are written with 17 significant digits, keys are sorted, and the
output is pure ASCII, so equal reports serialize to identical bytes and
``loads(dumps(x)) == x`` holds exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

import numpy as np

from .errors import EvposError
from .spectral import Operator

SCHEMA_VERSION = "1.0"
OPERATOR_FORMAT = "evpos-operator"


class ReportError(EvposError, ValueError):
    """A report or operator document is malformed."""


def _float_text(x: float) -> str:
    if not math.isfinite(x):
        raise ReportError(f"non-finite value {x!r} cannot be written as JSON")
    text = "%.17g" % (x + 0.0)
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _emit(obj: Any, out: list) -> None:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float_text(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ReportError(f"object keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    else:
        raise ReportError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj: Any) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out) + "\n"


def canonical_loads(text: str) -> Any:
    return json.loads(text)


def load_schema() -> dict:
    return json.loads(resources.files("evpos").joinpath("report.schema.json").read_text(encoding="utf-8"))


def validate(document: dict) -> None:
    """Raise :class:`ReportError` if ``document`` does not match the report schema."""
    import jsonschema

    try:
        jsonschema.validate(document, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ReportError(f"report invalid at {where}: {exc.message}") from None


@dataclass(frozen=True, eq=False)
class AnalysisReport:
    """A report document; ``data`` holds the JSON tree."""

    data: dict

    @property
    def overall_outcomes(self) -> list:
        return [c["overall"] for c in self.data.get("certificates", [])]

    @property
    def violated(self) -> bool:
        return "CONCLUSION-VIOLATED" in self.overall_outcomes

    def to_json(self) -> str:
        return canonical_dumps(self.data)

    @classmethod
    def from_json(cls, text: str, check: bool = True) -> "AnalysisReport":
        data = canonical_loads(text)
        if check:
            validate(data)
        return cls(data)

    def validate(self) -> None:
        validate(self.data)

    def __eq__(self, other) -> bool:
        return isinstance(other, AnalysisReport) and self.data == other.data


# ----------------------------------------------------------------------------
# operator documents


def operator_to_dict(op: Operator) -> dict:
    return {
        "format": OPERATOR_FORMAT,
        "schema_version": SCHEMA_VERSION,
        "name": op.name,
        "n": op.n,
        "matrix": op.matrix.tolist(),
        "source": jsonable(op.source),
    }


def operator_dumps(op: Operator) -> str:
    return canonical_dumps(operator_to_dict(op))


def operator_loads(text: str, name: Optional[str] = None) -> Operator:
    """Parse the JSON operator format: ``{"format": "evpos-operator", "matrix": [[...], ...], ...}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or doc.get("format") != OPERATOR_FORMAT:
        raise ReportError(f"not an operator document (expected format {OPERATOR_FORMAT!r})")
    rows = doc.get("matrix")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ReportError("'matrix' must be a non-empty list of rows")
    n = len(rows)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ReportError(f"operator must be square: row {i + 1} has {len(r)} entries, expected {n}")
        for j, x in enumerate(r):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ReportError(f"entry ({i + 1}, {j + 1}) is not a number")
    if "n" in doc and doc["n"] != n:
        raise ReportError(f"declared n = {doc['n']} but matrix has {n} rows")
    return Operator(np.array(rows, dtype=float), name=name or doc.get("name", "A"), source=doc.get("source", {}))


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars, arrays and complex numbers into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj

