"""JSON interchange for labelled matrices.

A matrix file is one JSON object::

    {
      "wires": [{"label": "Ai", "dim": 2, "role": "input"}, ...],
      "re": [[...], ...],
      "im": [[...], ...],
      "kind": "process_matrix",          # optional
      "structure": [[["o0"], ["1i"]], ...], # optional comb teeth
      "trace": 4                          # optional, informational
    }

Numbers are written with 17 significant digits so every finite double
survives a round trip, and the writer is deterministic, so saving a loaded
file reproduces it byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import SchemaError
from .objects import CombStructure
from .tensor import ROLES, LabeledMatrix, Wire

KINDS = ("state", "povm", "channel", "instrument", "comb", "superinstrument", "process_matrix")

_NUMBER_ROWS = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["wires", "re", "im"],
    "additionalProperties": False,
    "properties": {
        "wires": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "dim"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "dim": {"type": "integer", "minimum": 1},
                    "role": {"enum": list(ROLES)},
                },
            },
        },
        "re": _NUMBER_ROWS,
        "im": _NUMBER_ROWS,
        "kind": {"enum": list(KINDS)},
        "structure": {
            "type": "array",
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "array", "items": {"type": "string"}},
            },
        },
        "trace": {"type": "number"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass(frozen=True, eq=False)
class MatrixFile:
    matrix: LabeledMatrix
    kind: str | None = None
    structure: CombStructure | None = None


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else ""


def _num(x: float) -> str:
    if not np.isfinite(x):
        raise SchemaError("matrix entries must be finite", "")
    s = "%.17g" % x
    return "0" if s == "-0" else s


def _rows(a: np.ndarray) -> str:
    return "[" + ", ".join("[" + ", ".join(_num(v) for v in row) + "]" for row in a) + "]"


def dumps(mf: MatrixFile) -> str:
    m = mf.matrix
    wires = ", ".join(
        json.dumps({"label": w.label, "dim": w.dim, "role": w.role}) for w in m.wires
    )
    parts = [f'"wires": [{wires}]']
    if mf.kind is not None:
        parts.append(f'"kind": {json.dumps(mf.kind)}')
    if mf.structure is not None:
        parts.append(f'"structure": {json.dumps(mf.structure.to_json())}')
    parts.append(f'"trace": {_num(float(np.trace(m.data).real))}')
    parts.append(f'"re": {_rows(np.real(m.data))}')
    parts.append(f'"im": {_rows(np.imag(m.data))}')
    return "{\n  " + ",\n  ".join(parts) + "\n}\n"


def save(path: str | Path, x: LabeledMatrix | MatrixFile, kind: str | None = None,
         structure: CombStructure | None = None) -> None:
    mf = x if isinstance(x, MatrixFile) else MatrixFile(x, kind, structure)
    Path(path).write_text(dumps(mf))


def loads(text: str) -> MatrixFile:
    """Parse and check a matrix file.

    Raises:
        SchemaError: with a JSON-pointer path to the offending element.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg} at line {exc.lineno}", "") from exc
    err = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if err is not None:
        raise SchemaError(err.message, _pointer(err.absolute_path))
    wires = tuple(Wire(w["label"], int(w["dim"]), w.get("role", "auxiliary"))
                  for w in doc["wires"])
    labels = [w.label for w in wires]
    if len(set(labels)) != len(labels):
        raise SchemaError("wire labels must be distinct", "/wires")
    side = int(np.prod([w.dim for w in wires])) if wires else 1
    arrays = {}
    for key in ("re", "im"):
        rows = doc[key]
        if len(rows) != side:
            raise SchemaError(f"expected {side} rows, found {len(rows)}", f"/{key}")
        for r, row in enumerate(rows):
            if len(row) != side:
                raise SchemaError(f"expected {side} columns, found {len(row)}", f"/{key}/{r}")
        arrays[key] = np.array(rows, dtype=float).reshape(side, side)
    data = arrays["re"] + 1j * arrays["im"]
    structure = None
    if "structure" in doc:
        structure = CombStructure.from_json(doc["structure"])
        if sorted(structure.labels) != sorted(labels):
            raise SchemaError("structure labels differ from wire labels", "/structure")
    return MatrixFile(LabeledMatrix(wires, data), doc.get("kind"), structure)


def load(path: str | Path) -> MatrixFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}", "") from exc
    return loads(text)
