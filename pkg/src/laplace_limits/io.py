"""CSV readers and writers for points, edge lists and vertex functions.

Floats are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DataFileError",
    "fmt",
    "read_points",
    "write_points",
    "read_edge_list",
    "write_edge_list",
    "read_vertex_function",
    "write_vertex_function",
]


class DataFileError(ValueError):
    pass


def fmt(x) -> str:
    return repr(float(x))


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row]


def read_points(path) -> np.ndarray:
    """Read a ``x0,x1,...`` file into an ``(n, d)`` array."""
    rows = _rows(path)
    if not rows:
        raise DataFileError(f"{path}: empty points file")
    header = [c.strip() for c in rows[0]]
    if header != [f"x{k}" for k in range(len(header))]:
        raise DataFileError(f"{path}: header must be x0,x1,...; got {','.join(header)}")
    body = rows[1:]
    if not body:
        raise DataFileError(f"{path}: no points")
    try:
        pts = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise DataFileError(f"{path}: {exc}") from None
    if pts.ndim != 2 or pts.shape[1] != len(header):
        raise DataFileError(f"{path}: every row needs {len(header)} values")
    return pts


def write_points(path, points) -> None:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(points.shape[1])])
        for row in points:
            w.writerow([fmt(v) for v in row])


def write_edge_list(path, weights, canonical: bool = True) -> int:
    """Write ``i,j,w`` rows for every positive weight; returns the number of rows.

    With ``canonical=True`` (symmetric matrices) only rows with ``i < j`` are written.
    """
    coo = sp.coo_matrix(weights)
    order = np.lexsort((coo.col, coo.row))
    i, j, v = coo.row[order], coo.col[order], coo.data[order]
    keep = v > 0
    if canonical:
        keep &= i < j
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "w"])
        for a, b, c in zip(i[keep], j[keep], v[keep]):
            w.writerow([int(a), int(b), fmt(c)])
    return int(keep.sum())


def read_edge_list(path, n: int | None = None, symmetric: bool = True) -> sp.csr_matrix:
    rows = _rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["i", "j", "w"]:
        raise DataFileError(f"{path}: header must be i,j,w")
    try:
        ij = np.array([[int(r[0]), int(r[1])] for r in rows[1:]], dtype=np.intp).reshape(-1, 2)
        w = np.array([float(r[2]) for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DataFileError(f"{path}: {exc}") from None
    if n is None:
        n = int(ij.max()) + 1 if ij.size else 0
    W = sp.coo_matrix((w, (ij[:, 0], ij[:, 1])), shape=(n, n)).tocsr()
    if symmetric:
        # canonical files list each undirected edge once
        W = W.maximum(W.T)
    return sp.csr_matrix(W)


def read_vertex_function(path, n: int | None = None) -> np.ndarray:
    rows = _rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["i", "value"]:
        raise DataFileError(f"{path}: header must be i,value")
    try:
        idx = np.array([int(r[0]) for r in rows[1:]], dtype=np.intp)
        val = np.array([float(r[1]) for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DataFileError(f"{path}: {exc}") from None
    n = int(idx.max()) + 1 if n is None and idx.size else (n or 0)
    if idx.size != n or set(idx.tolist()) != set(range(n)):
        raise DataFileError(f"{path}: expected exactly one value for each of {n} vertices")
    out = np.empty(n)
    out[idx] = val
    return out


def write_vertex_function(path, values) -> None:
    values = np.asarray(values, dtype=float).ravel()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "value"])
        for k, v in enumerate(values):
            w.writerow([k, fmt(v)])
