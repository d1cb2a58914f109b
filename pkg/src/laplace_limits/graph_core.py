"""Weighted graphs, the (chi, gamma, phi) inner-product structure and graph Laplacians.

All degrees follow the *averaged* convention used throughout this package:

    d_i^out = (1/n) sum_j w_ij,     d_i^in = (1/n) sum_j w_ji.

Many libraries drop the ``1/n``; here it is kept inside the degrees and every
operator, because the continuum limit constants depend on it.

Edge functions are stored as 1-D arrays aligned with ``graph.edge_i`` /
``graph.edge_j`` (the edge set ``E = {(i, j) : w_ij > 0}`` in row-major order).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

__all__ = [
    "IsolatedVertexError",
    "WeightedGraph",
    "GraphStructure",
    "preset_structure",
    "vertex_inner",
    "edge_inner",
    "difference",
    "zhou_difference",
    "adjoint",
    "zhou_adjoint",
    "laplacian_general",
    "laplacian_rw",
    "laplacian_unnorm",
    "laplacian_norm",
    "DENSE_LIMIT",
]

# Above this vertex count graphs are kept in CSR form.
DENSE_LIMIT = 2048

Matrix = Union[np.ndarray, sp.csr_matrix]


class IsolatedVertexError(ValueError):
    """A vertex has neither incoming nor outgoing edges."""

    def __init__(self, index: int, message: str | None = None):
        self.index = int(index)
        super().__init__(message or f"isolated vertex at index {self.index}")


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    weights: Matrix
    degrees_out: np.ndarray
    degrees_in: np.ndarray
    edge_i: np.ndarray
    edge_j: np.ndarray
    edge_w: np.ndarray
    symmetric: bool

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        """Undirected degree; only meaningful for symmetric graphs."""
        return self.degrees_out

    @classmethod
    def from_weights(cls, weights, dense: bool | None = None) -> "WeightedGraph":
        """Validate ``weights`` and precompute degrees and the edge list.

        ``dense=None`` picks dense storage up to :data:`DENSE_LIMIT` vertices.
        """
        if sp.issparse(weights):
            W = sp.csr_matrix(weights, dtype=float)
        else:
            W = np.array(weights, dtype=float)
            if W.ndim != 2:
                raise ValueError("weight matrix must be two-dimensional")
        n, n2 = W.shape
        if n != n2 or n == 0:
            raise ValueError(f"weight matrix must be square and non-empty, got {W.shape}")
        if dense is None:
            dense = n <= DENSE_LIMIT
        if dense and sp.issparse(W):
            W = W.toarray()
        elif not dense and not sp.issparse(W):
            W = sp.csr_matrix(W)
        if sp.issparse(W):
            W.eliminate_zeros()
            W.sort_indices()
            data = W.data
        else:
            data = W
        if not np.all(np.isfinite(data)):
            raise ValueError("weights must be finite")
        if np.any(data < 0):
            raise ValueError("weights must be non-negative")

        if sp.issparse(W):
            coo = W.tocoo()
            order = np.lexsort((coo.col, coo.row))
            ei, ej, ew = coo.row[order], coo.col[order], coo.data[order]
            d_out = np.asarray(W.sum(axis=1)).ravel() / n
            d_in = np.asarray(W.sum(axis=0)).ravel() / n
            diff = abs(W - W.T)
            symmetric = diff.nnz == 0 or diff.max() <= 1e-12 * max(1.0, np.max(np.abs(W.data)))
        else:
            ei, ej = np.nonzero(W)
            ew = W[ei, ej]
            d_out = W.sum(axis=1) / n
            d_in = W.sum(axis=0) / n
            symmetric = bool(np.allclose(W, W.T, rtol=0.0, atol=1e-12 * max(1.0, np.max(np.abs(W)))))
        bad = np.flatnonzero(d_out + d_in <= 0)
        if bad.size:
            raise IsolatedVertexError(bad[0])
        return cls(
            weights=W,
            degrees_out=d_out,
            degrees_in=d_in,
            edge_i=ei.astype(np.intp),
            edge_j=ej.astype(np.intp),
            edge_w=ew.astype(float),
            symmetric=symmetric,
        )

    def matvec(self, f: np.ndarray) -> np.ndarray:
        return np.asarray(self.weights @ f).ravel()

    def todense(self) -> np.ndarray:
        return self.weights.toarray() if sp.issparse(self.weights) else np.array(self.weights)


@dataclass(frozen=True)
class GraphStructure:
    """The functions defining ``<.,.>_V``, ``<.,.>_E`` and the difference operator.

    ``chi_out``/``chi_in`` weight the vertices through their degrees, ``phi``
    weights the edges and ``gamma`` scales the difference along an edge.
    All four must accept numpy arrays.
    """

    chi_out: Callable[[np.ndarray], np.ndarray]
    chi_in: Callable[[np.ndarray], np.ndarray]
    gamma: Callable[[np.ndarray], np.ndarray]
    phi: Callable[[np.ndarray], np.ndarray]

    def chi(self, g: WeightedGraph) -> np.ndarray:
        return np.asarray(self.chi_out(g.degrees_out), float) + np.asarray(self.chi_in(g.degrees_in), float)

    def check(self, grid=None) -> None:
        """Spot-check the sign conventions on a positive grid; raises ``ValueError``."""
        grid = np.geomspace(1e-6, 1e6, 25) if grid is None else np.asarray(grid, float)
        zero = np.zeros(1)
        for name in ("chi_out", "chi_in", "phi"):
            fn = getattr(self, name)
            if np.asarray(fn(zero))[0] != 0:
                raise ValueError(f"{name}(0) must be 0")
            if np.any(np.asarray(fn(grid)) <= 0):
                raise ValueError(f"{name} must be positive on positive arguments")
        if np.any(np.asarray(self.gamma(grid)) <= 0):
            raise ValueError("gamma must be positive on positive arguments")


def _positive_part(value):
    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, value, 0.0)

    return fn


def _half(x):
    return 0.5 * np.asarray(x, dtype=float)


def preset_structure(kind: str) -> GraphStructure:
    """Canonical structures reproducing the random-walk or unnormalized Laplacian.

    Both use ``gamma(w) = sqrt(w)`` and ``phi = 1`` on positive weights. The
    vertex weight is split evenly between ``chi_out`` and ``chi_in`` so that on
    symmetric graphs ``chi_out(d) + chi_in(d)`` equals ``d`` (rw) or ``1`` (unnorm).
    """
    if kind == "rw":
        chi = _half
    elif kind == "unnorm":
        chi = _positive_part(0.5)
    else:
        raise ValueError(f"no preset structure for {kind!r}; use 'rw' or 'unnorm'")
    return GraphStructure(chi_out=chi, chi_in=chi, gamma=np.sqrt, phi=_positive_part(1.0))


def _vertex_vec(g: WeightedGraph, f, name="f") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (g.n,):
        raise ValueError(f"{name} must have shape ({g.n},), got {f.shape}")
    return f


def _edge_vec(g: WeightedGraph, u, name="u") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != g.edge_w.shape:
        raise ValueError(f"{name} must have one value per edge ({g.edge_w.size}), got {u.shape}")
    return u


def vertex_inner(g: WeightedGraph, s: GraphStructure, f, h) -> float:
    """``<f, h>_V = (1/n) sum_i f_i h_i chi_i``."""
    f = _vertex_vec(g, f)
    h = _vertex_vec(g, h, "g")
    return float(np.dot(f * h, s.chi(g)) / g.n)


def edge_inner(g: WeightedGraph, s: GraphStructure, F, G) -> float:
    """``<F, G>_E = 1/(2 n^2) sum_{(i,j) in E} F_ij G_ij phi(w_ij)``."""
    F = _edge_vec(g, F, "F")
    G = _edge_vec(g, G, "G")
    return float(np.dot(F * G, s.phi(g.edge_w)) / (2.0 * g.n**2))


def difference(g: WeightedGraph, s: GraphStructure, f) -> np.ndarray:
    """``(df)(e_ij) = gamma(w_ij) (f(j) - f(i))``."""
    f = _vertex_vec(g, f)
    return s.gamma(g.edge_w) * (f[g.edge_j] - f[g.edge_i])


def _sqrt_degrees(g: WeightedGraph) -> np.ndarray:
    d = g.degrees_out
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        raise IsolatedVertexError(bad[0], f"vertex {bad[0]} has zero degree")
    return np.sqrt(d)


def zhou_difference(g: WeightedGraph, s: GraphStructure, f) -> np.ndarray:
    """Degree-normalized difference ``gamma(w_ij) (f(j)/sqrt(d_j) - f(i)/sqrt(d_i))``.

    Unlike :func:`difference` it does not vanish on constants unless all
    degrees are equal. Uses the out-degree, which is the degree for undirected graphs.
    """
    f = _vertex_vec(g, f)
    return difference(g, s, f / _sqrt_degrees(g))


def _chi_positive(g: WeightedGraph, s: GraphStructure) -> np.ndarray:
    chi = s.chi(g)
    bad = np.flatnonzero(chi <= 0)
    if bad.size:
        raise ValueError(f"vertex weight chi vanishes at vertex {bad[0]}")
    return chi


def adjoint(g: WeightedGraph, s: GraphStructure, u) -> np.ndarray:
    """Adjoint of :func:`difference` with respect to ``<.,.>_E`` and ``<.,.>_V``.

    ``(d*u)(l) = 1/(2 chi_l) [ (1/n) sum_i gamma(w_il) u_il phi(w_il)
                              - (1/n) sum_i gamma(w_li) u_li phi(w_li) ]``
    """
    u = _edge_vec(g, u)
    chi = _chi_positive(g, s)
    flow = s.gamma(g.edge_w) * u * s.phi(g.edge_w)
    incoming = np.bincount(g.edge_j, weights=flow, minlength=g.n)
    outgoing = np.bincount(g.edge_i, weights=flow, minlength=g.n)
    return (incoming - outgoing) / (2.0 * chi * g.n)


def zhou_adjoint(g: WeightedGraph, s: GraphStructure, u) -> np.ndarray:
    """Adjoint of :func:`zhou_difference`; equals ``D^{-1/2} d*``."""
    return adjoint(g, s, u) / _sqrt_degrees(g)


def laplacian_general(g: WeightedGraph, s: GraphStructure, f) -> np.ndarray:
    """Explicit form of ``d* d``, valid for directed graphs.

    ``(Lf)(l) = 1/(2 chi_l) (1/n) sum_i (gamma^2 phi(w_il) + gamma^2 phi(w_li)) (f(l) - f(i))``

    Computed edge-wise without going through :func:`adjoint`, so the two can be
    checked against each other.
    """
    f = _vertex_vec(g, f)
    chi = _chi_positive(g, s)
    c = s.gamma(g.edge_w) ** 2 * s.phi(g.edge_w)
    jump = c * (f[g.edge_i] - f[g.edge_j])
    acc = np.bincount(g.edge_i, weights=jump, minlength=g.n) - np.bincount(
        g.edge_j, weights=jump, minlength=g.n
    )
    return acc / (2.0 * chi * g.n)


def _require_symmetric(g: WeightedGraph, name: str) -> None:
    if not g.symmetric:
        raise ValueError(f"{name} requires a symmetric weight matrix; use laplacian_general")


def laplacian_rw(g: WeightedGraph, f) -> np.ndarray:
    """``f - D^{-1} W f / n``."""
    _require_symmetric(g, "laplacian_rw")
    f = _vertex_vec(g, f)
    d = g.degrees
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        raise IsolatedVertexError(bad[0])
    return f - g.matvec(f) / (g.n * d)


def laplacian_unnorm(g: WeightedGraph, f) -> np.ndarray:
    """``D f - W f / n``."""
    _require_symmetric(g, "laplacian_unnorm")
    f = _vertex_vec(g, f)
    return g.degrees * f - g.matvec(f) / g.n


def laplacian_norm(g: WeightedGraph, f) -> np.ndarray:
    """``f - D^{-1/2} W D^{-1/2} f / n``; annihilates ``sqrt(d)``."""
    _require_symmetric(g, "laplacian_norm")
    f = _vertex_vec(g, f)
    sd = _sqrt_degrees(g)
    return f - g.matvec(f / sd) / (g.n * sd)
