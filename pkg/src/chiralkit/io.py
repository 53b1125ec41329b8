"""State-file I/O: JSON documents carrying subsystem dimensions and a dense
complex matrix as row-major [re, im] pairs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .qmat import DensityMatrix, ShapeMismatchError


class StateFileError(ValueError):
    """Malformed state-file document (bad JSON or missing fields)."""


def parse_state_document(doc: dict, atol: float = 1e-8) -> DensityMatrix:
    """Validate a parsed JSON document and build the density matrix.

    Raises StateFileError for structural problems, ShapeMismatchError when
    the matrix length disagrees with the dims, and StateInvariantError when
    the matrix fails the density-matrix invariants at atol.
    """
    if not isinstance(doc, dict):
        raise StateFileError("state file must be a JSON object")
    try:
        dims = tuple(int(d) for d in doc["dims"])
        entries = doc["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"missing or malformed dims/matrix fields: {exc}") from exc
    d = int(np.prod(dims)) if dims else 0
    if not isinstance(entries, list) or len(entries) != d * d:
        raise ShapeMismatchError(
            f"matrix has {len(entries) if isinstance(entries, list) else 'no'} entries, "
            f"expected {d * d} for dims {dims}"
        )
    try:
        flat = np.array([complex(re, im) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise StateFileError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    return DensityMatrix(dims, flat.reshape(d, d), atol=atol)


def parse_state_file(path, atol: float = 1e-8) -> DensityMatrix:
    """Load and validate a state file from disk."""
    text = Path(path).read_text()
    doc = json.loads(text)  # json.JSONDecodeError for malformed input
    return parse_state_document(doc, atol=atol)


def state_document(rho: DensityMatrix, label: str | None = None) -> dict:
    doc = {
        "dims": list(rho.dims),
        "matrix": [[float(z.real), float(z.imag)] for z in rho.data.reshape(-1)],
    }
    if label is not None:
        doc["label"] = label
    return doc


def write_state_file(path, rho: DensityMatrix, label: str | None = None) -> None:
    Path(path).write_text(json.dumps(state_document(rho, label)) + "\n")
