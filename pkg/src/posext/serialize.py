"""JSON encodings for matrices, operator systems, maps and results.

Matrix format: {"rows": n, "cols": m, "data": [[re, im], ...]} with the
data list in row-major order.  Every other format embeds this one.
"""

from __future__ import annotations

import json

import numpy as np

from . import opsys
from .errors import DimensionMismatch
from .linalg import as_matrix
from .maps import LinearMap

FLAVOR_NAMES = {opsys.REAL_SA: "real-sa", opsys.COMPLEX: "complex"}
FLAVOR_FROM_NAME = {v: k for k, v in FLAVOR_NAMES.items()}


def matrix_to_json(m: np.ndarray) -> dict:
    a = as_matrix(m)
    data = [[float(z.real), float(z.imag)] for z in a.ravel(order="C")]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise DimensionMismatch(f"matrix data length {len(data)} != {rows}*{cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    return as_matrix(flat.reshape(rows, cols))


def opsys_to_json(system: opsys.OperatorSystem) -> dict:
    return {
        "dim": system.dim,
        "flavor": FLAVOR_NAMES[system.flavor],
        "generators": [matrix_to_json(g) for g in system.generators],
    }


def opsys_from_json(obj: dict) -> opsys.OperatorSystem:
    flavor = FLAVOR_FROM_NAME[obj["flavor"]]
    generators = [matrix_from_json(g) for g in obj["generators"]]
    return opsys.build(int(obj["dim"]), flavor, generators)


def map_to_json(phi: LinearMap) -> dict:
    return {
        "domain": opsys_to_json(phi.domain),
        "dim_k": phi.dim_k,
        "images": [matrix_to_json(img) for img in phi.images],
    }


def map_from_json(obj: dict) -> LinearMap:
    domain = opsys_from_json(obj["domain"])
    images = [matrix_from_json(m) for m in obj["images"]]
    return LinearMap(domain=domain, dim_k=int(obj["dim_k"]), images=images)


def choi_to_json(c) -> dict:
    return {"dim_h": c.dim_h, "dim_k": c.dim_k, "matrix": matrix_to_json(c.matrix)}


def choi_from_json(obj: dict):
    from .maps import ChoiMatrix

    return ChoiMatrix(
        dim_h=int(obj["dim_h"]), dim_k=int(obj["dim_k"]), matrix=matrix_from_json(obj["matrix"])
    )


def _scalarize(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_scalarize(v) for v in value]
    if isinstance(value, dict):
        return {k: _scalarize(v) for k, v in value.items()}
    return value


def result_to_json(res) -> dict:
    """ExtensionResult -> JSON with status, certificate scalars and the map."""
    return {
        "status": res.status,
        "certificate": _scalarize(res.certificate),
        "agreement_error": res.agreement_error,
        "stall_distance": res.stall_distance,
        "iterations": res.iterations,
        "extension": map_to_json(res.extension) if res.extension is not None else None,
    }


def dumps(obj: dict) -> str:
    """Canonical serialization: sorted keys, two-space indent, newline end."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def load(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
