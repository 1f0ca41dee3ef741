"""JSON problem and spectrum files, CSV plot tables.

Complex numbers are stored as ``[re, im]`` pairs. Files are written with
sorted keys and shortest round-trip float formatting, so a read followed by a
write reproduces the original bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SchemaError
from .model import CosineSeries, GraphProblem, Spectrum

PROBLEM_SCHEMA_ID = "starspec.problem/1"
SPECTRUM_SCHEMA_ID = "starspec.spectrum/1"

_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["schema", "m", "h"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": PROBLEM_SCHEMA_ID},
        "m": {"type": "integer", "minimum": 2},
        "h": {"type": "array", "items": _COMPLEX},
        "p": {"type": "array", "items": {"type": "array", "items": _COMPLEX, "minItems": 1}},
        "p_grid": {
            "type": "object",
            "required": ["values", "K"],
            "additionalProperties": False,
            "properties": {
                "values": {"type": "array", "items": {"type": "array", "items": _COMPLEX, "minItems": 2}},
                "K": {"type": "integer", "minimum": 0},
            },
        },
        "meta": {"type": "object"},
    },
}

SPECTRUM_SCHEMA = {
    "type": "object",
    "required": ["schema", "branches", "entries"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SPECTRUM_SCHEMA_ID},
        "branches": {"type": "integer", "minimum": 1},
        "numbering_source": {"enum": ["computed", "user-assigned", "template"]},
        "entries": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [
                    {"type": "integer", "minimum": 0},
                    {"type": "integer", "minimum": 1},
                    {"type": "number"},
                    {"type": "number"},
                    {"type": "integer", "minimum": 1},
                ],
                "minItems": 5,
                "maxItems": 5,
            },
        },
        "provenance": {"type": "object"},
    },
}


def _pair(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _complex(pair) -> complex:
    return complex(pair[0], pair[1])


def jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return _pair(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _validate(doc, schema, what: str):
    try:
        jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"invalid {what} at {path}: {exc.message}") from None


def _load(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


# --------------------------------------------------------------------------
# problems


def problem_to_dict(problem: GraphProblem, meta: dict | None = None) -> dict:
    doc = {
        "schema": PROBLEM_SCHEMA_ID,
        "m": problem.m,
        "h": [_pair(v) for v in problem.h],
        "p": [[_pair(c) for c in q.coef] for q in problem.p],
    }
    if meta:
        doc["meta"] = meta
    return doc


def problem_from_dict(doc: dict) -> tuple[GraphProblem, dict]:
    """Build a problem; returns ``(problem, info)`` where ``info`` records any
    projection residuals of grid-sampled densities."""
    _validate(doc, PROBLEM_SCHEMA, "problem file")
    m = doc["m"]
    if len(doc["h"]) != m:
        raise SchemaError(f"m={m} but {len(doc['h'])} Robin coefficients given")
    if "p" in doc and "p_grid" in doc:
        raise SchemaError("give either p or p_grid, not both")
    h = [_complex(v) for v in doc["h"]]
    info: dict = {}
    if "p_grid" in doc:
        grid = doc["p_grid"]
        if len(grid["values"]) != m:
            raise SchemaError(f"p_grid has {len(grid['values'])} edges, expected {m}")
        p, resid = [], []
        for vals in grid["values"]:
            q, r = CosineSeries.from_samples([_complex(v) for v in vals], grid["K"])
            p.append(q)
            resid.append(r)
        info["projection_residual"] = resid
    elif "p" in doc:
        if len(doc["p"]) != m:
            raise SchemaError(f"p has {len(doc['p'])} edges, expected {m}")
        p = [CosineSeries([_complex(c) for c in row]) for row in doc["p"]]
    else:
        p = None
    return GraphProblem.create(h, p), info


def write_problem(path, problem: GraphProblem, meta: dict | None = None) -> None:
    Path(path).write_text(dumps(problem_to_dict(problem, meta)), encoding="utf-8")


def read_problem(path) -> tuple[GraphProblem, dict]:
    return problem_from_dict(_load(path))


# --------------------------------------------------------------------------
# spectra


def spectrum_to_dict(spectrum: Spectrum, provenance: dict | None = None) -> dict:
    entries = [[n, k, float(lam.real), float(lam.imag), mult] for n, k, lam, mult in spectrum.entries()]
    prov = dict(spectrum.meta)
    prov.update(provenance or {})
    return {
        "schema": SPECTRUM_SCHEMA_ID,
        "branches": spectrum.branches,
        "numbering_source": spectrum.source,
        "entries": entries,
        "provenance": prov,
    }


def spectrum_from_dict(doc: dict) -> Spectrum:
    _validate(doc, SPECTRUM_SCHEMA, "spectrum file")
    b = doc["branches"]
    entries = doc["entries"]
    if not entries:
        raise SchemaError("spectrum file has no entries")
    N = max(e[0] for e in entries) + 1
    table = np.full((N, b), np.nan + 0j)
    for n, k, re, im, _ in entries:
        if k > b:
            raise SchemaError(f"branch {k} exceeds declared {b}")
        if not np.isnan(table[n, k - 1].real):
            raise SchemaError(f"duplicate entry for shell {n}, branch {k}")
        table[n, k - 1] = complex(re, im)
    if np.any(np.isnan(table.real)):
        raise SchemaError("spectrum file leaves some (n, k) slots empty")
    return Spectrum.from_table(table, source=doc.get("numbering_source", "user-assigned"),
                               meta=doc.get("provenance", {}))


def write_spectrum(path, spectrum: Spectrum, provenance: dict | None = None) -> None:
    Path(path).write_text(dumps(spectrum_to_dict(spectrum, provenance)), encoding="utf-8")


def read_spectrum(path) -> Spectrum:
    return spectrum_from_dict(_load(path))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
