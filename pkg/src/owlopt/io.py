"""CSV and JSON input and output with explicit parse diagnostics.

Vectors travel as single-column CSV or as JSON arrays (picked by file
extension, or sniffed when reading standard input); matrices are plain
comma-separated CSV.  Parse failures name the file, line, and offending
field.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import numpy as np

from .norms import WeightVector
from .solvers import RegressionProblem

__all__ = [
    "read_matrix_csv",
    "write_matrix_csv",
    "load_vector",
    "write_vector",
    "load_weights",
    "write_weights",
    "load_problem_csv",
]


def _parse_rows(lines, name: str) -> list[list[float]]:
    rows: list[list[float]] = []
    width = None
    first_line = None
    for lineno, record in enumerate(csv.reader(lines), start=1):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue  # blank line
        if width is None:
            width = len(record)
            first_line = lineno
        elif len(record) != width:
            raise ValueError(
                f"{name}: line {lineno} has {len(record)} fields, expected "
                f"{width} (from line {first_line})")
        row = []
        for col, tok in enumerate(record, start=1):
            try:
                row.append(float(tok))
            except ValueError:
                raise ValueError(
                    f"{name}: line {lineno}, field {col}: could not parse "
                    f"{tok.strip()!r} as a number") from None
        rows.append(row)
    if not rows:
        raise ValueError(f"{name}: no data rows")
    return rows


def read_matrix_csv(path) -> np.ndarray:
    """Read a dense matrix from comma-separated CSV.

    Raises ValueError naming the line for ragged rows and the exact field
    for non-numeric entries.
    """
    with open(path, newline="") as fh:
        rows = _parse_rows(fh, str(path))
    return np.asarray(rows, dtype=np.float64)


def write_matrix_csv(path, M) -> None:
    """Write a matrix as comma-separated CSV at round-trip precision."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def _vector_from_json(text: str, name: str) -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{name}: invalid JSON ({exc})") from None
    if not isinstance(data, list) or not data:
        raise ValueError(f"{name}: expected a non-empty JSON array of numbers")
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in data):
        raise ValueError(f"{name}: expected a non-empty JSON array of numbers")
    return np.asarray(data, dtype=np.float64)


def _vector_from_csv_text(lines, name: str) -> np.ndarray:
    rows = _parse_rows(lines, name)
    if any(len(r) != 1 for r in rows):
        width = max(len(r) for r in rows)
        raise ValueError(f"{name}: expected a single column, found {width} fields")
    return np.asarray([r[0] for r in rows], dtype=np.float64)


def load_vector(source) -> np.ndarray:
    """Load a vector from a CSV or JSON file, or from stdin when source is '-'.

    Files ending in .json parse as a JSON array; everything else as a
    single-column CSV.  Standard input is sniffed: a leading '[' means JSON.
    """
    if str(source) == "-":
        text = sys.stdin.read()
        if text.lstrip().startswith("["):
            return _vector_from_json(text, "<stdin>")
        return _vector_from_csv_text(text.splitlines(), "<stdin>")
    path = Path(source)
    if path.suffix.lower() == ".json":
        return _vector_from_json(path.read_text(), str(path))
    with open(path, newline="") as fh:
        return _vector_from_csv_text(fh, str(path))


def write_vector(path, x) -> None:
    """Write a vector as a JSON array (.json) or single-column CSV (otherwise)."""
    x = np.asarray(x, dtype=np.float64)
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps([float(v) for v in x]) + "\n")
    else:
        with open(path, "w", newline="") as fh:
            for v in x:
                fh.write(f"{float(v):.17g}\n")


def load_weights(source) -> WeightVector:
    """Load and validate an OWL weight vector (single-column CSV or JSON array)."""
    return WeightVector(load_vector(source))


def write_weights(path, w) -> None:
    """Write an OWL weight vector; format picked by extension as for vectors."""
    w = w.w if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    write_vector(path, w)


def load_problem_csv(path_H, path_y) -> RegressionProblem:
    """Read a design matrix and observation vector into a RegressionProblem.

    Raises ValueError with distinct diagnostics for ragged rows, non-numeric
    fields, and row-count mismatches between the two files.
    """
    H = read_matrix_csv(path_H)
    y = load_vector(path_y)
    if y.size != H.shape[0]:
        raise ValueError(
            f"dimension mismatch: {path_H} has {H.shape[0]} rows but "
            f"{path_y} has {y.size} entries")
    return RegressionProblem(H, y)
