"""Random neighborhood graphs with density-reweighted kernel weights.

For samples ``X_1..X_n``, bandwidth ``h`` and reweighting exponent ``lam``::

    d_{h,n}(x)     = (1/n) sum_j k_h(|x - X_j|^2)
    kt(x, X_j)     = k_h(|x - X_j|^2) / [d_{h,n}(x) d_{h,n}(X_j)]^lam
    dt(x)          = (1/n) sum_j kt(x, X_j)
    (A f)(x)       = (1/n) sum_j kt(x, X_j) f(X_j)

The extended Laplacians below evaluate these at any ambient point ``x`` and
coincide with the matrix Laplacians of :mod:`graph_core` (divided by ``h^2``)
when ``x`` is one of the samples.

Sums over neighbors are exactly rounded (``math.fsum``), so results do not
depend on neighbor order or worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .graph_core import IsolatedVertexError, WeightedGraph
from .kernel import KernelProfile, scaled_eval

__all__ = [
    "EmptyNeighborhoodError",
    "RadiusIndex",
    "NeighborhoodGraph",
    "build_graph",
    "degree_ext",
    "average_op",
    "apply_laplacian",
    "dirichlet_energy",
    "KINDS",
]

KINDS = ("rw", "unnorm", "norm")


class EmptyNeighborhoodError(ValueError):
    """No sample lies within the kernel support around the query point."""


class RadiusIndex:
    """Exact fixed-radius neighbor queries over a point set."""

    def __init__(self, points: np.ndarray):
        self.points = np.ascontiguousarray(points, dtype=float)
        self._tree = cKDTree(self.points)

    def query(self, x, radius: float) -> np.ndarray:
        """Sorted indices ``j`` with ``|x - X_j| <= radius``."""
        idx = self._tree.query_ball_point(np.asarray(x, dtype=float), radius)
        return np.array(sorted(idx), dtype=np.intp)

    def pairs(self, radius: float) -> np.ndarray:
        """All pairs ``i < j`` within ``radius``, sorted row-major, shape ``(k, 2)``."""
        pr = self._tree.query_pairs(radius, output_type="ndarray")
        if pr.size == 0:
            return np.empty((0, 2), dtype=np.intp)
        pr = np.sort(pr, axis=1)
        order = np.lexsort((pr[:, 1], pr[:, 0]))
        return pr[order].astype(np.intp)

    @staticmethod
    def brute_force(points, x, radius: float) -> np.ndarray:
        d2 = np.sum((np.asarray(points) - np.asarray(x)) ** 2, axis=1)
        return np.flatnonzero(d2 <= radius * radius)


def _sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum((a - b) ** 2, axis=-1)


def _row_fsum(indptr: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.array(
        [math.fsum(values[indptr[r]:indptr[r + 1]]) for r in range(indptr.size - 1)], dtype=float
    )


@dataclass(frozen=True, eq=False)
class NeighborhoodGraph:
    points: np.ndarray
    h: float
    lam: float
    m: int
    kernel: KernelProfile
    base_weights: sp.csr_matrix
    base_degrees: np.ndarray
    reweighted_weights: sp.csr_matrix
    reweighted_degrees: np.ndarray
    index: RadiusIndex = field(repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def radius(self) -> float:
        return self.h * self.kernel.support_radius

    def weighted_graph(self) -> WeightedGraph:
        """The reweighted graph as a :class:`WeightedGraph` (CSR storage)."""
        return WeightedGraph.from_weights(self.reweighted_weights, dense=False)

    def _kernel_row(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.points.shape[1],):
            raise ValueError(f"query point must have shape ({self.points.shape[1]},), got {x.shape}")
        idx = self.index.query(x, self.radius)
        kh = scaled_eval(self.kernel, self.h, self.m, _sq_dist(self.points[idx], x))
        keep = kh > 0
        idx, kh = idx[keep], kh[keep]
        d_x = math.fsum(kh) / self.n
        if d_x <= 0:
            raise EmptyNeighborhoodError(
                f"no sample within {self.radius:g} of the query point {x.tolist()}"
            )
        if self.lam == 0:
            kt = kh
        else:
            kt = kh / (d_x * self.base_degrees[idx]) ** self.lam
        return idx, kt


def build_graph(points, kernel: KernelProfile, h: float, lam: float, m: int) -> NeighborhoodGraph:
    """Build base and reweighted kernel graphs on ``points`` (shape ``(n, d)``).

    Raises :class:`IsolatedVertexError` naming the first sample with no
    neighbor inside the kernel support.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least two sample points")
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    if int(m) != m or m < 1:
        raise ValueError(f"intrinsic dimension must be a positive integer, got {m}")
    m = int(m)
    lam = float(lam)

    index = RadiusIndex(pts)
    pr = index.pairs(h * kernel.support_radius)
    if pr.size:
        w = scaled_eval(kernel, h, m, _sq_dist(pts[pr[:, 0]], pts[pr[:, 1]]))
        keep = w > 0
        pr, w = pr[keep], w[keep]
    else:
        w = np.empty(0)
    rows = np.concatenate([pr[:, 0], pr[:, 1]])
    cols = np.concatenate([pr[:, 1], pr[:, 0]])
    vals = np.concatenate([w, w])
    base = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    base.sort_indices()

    base_deg = _row_fsum(base.indptr, base.data) / n
    bad = np.flatnonzero(base_deg <= 0)
    if bad.size:
        raise IsolatedVertexError(
            bad[0], f"isolated vertex at index {bad[0]}: no sample within {h * kernel.support_radius:g}"
        )

    if lam == 0:
        rew = base.copy()
    else:
        row_of = np.repeat(np.arange(n), np.diff(base.indptr))
        data = base.data / (base_deg[row_of] * base_deg[base.indices]) ** lam
        rew = sp.csr_matrix((data, base.indices.copy(), base.indptr.copy()), shape=(n, n))
    rew_deg = _row_fsum(rew.indptr, rew.data) / n
    return NeighborhoodGraph(
        points=pts,
        h=float(h),
        lam=lam,
        m=m,
        kernel=kernel,
        base_weights=base,
        base_degrees=base_deg,
        reweighted_weights=rew,
        reweighted_degrees=rew_deg,
        index=index,
    )


def degree_ext(g: NeighborhoodGraph, x) -> float:
    """Extended reweighted degree ``dt(x)``."""
    _, kt = g._kernel_row(x)
    return math.fsum(kt) / g.n


def average_op(g: NeighborhoodGraph, x, f_samples) -> float:
    """``(A f)(x) = (1/n) sum_j kt(x, X_j) f(X_j)``."""
    f = _samples(g, f_samples)
    idx, kt = g._kernel_row(x)
    return math.fsum(kt * f[idx]) / g.n


def _samples(g: NeighborhoodGraph, f_samples) -> np.ndarray:
    f = np.asarray(f_samples, dtype=float)
    if f.shape != (g.n,):
        raise ValueError(f"sample values must have shape ({g.n},), got {f.shape}")
    return f


def apply_laplacian(g: NeighborhoodGraph, kind: str, x, f_samples, f_at_x: float) -> float:
    """Evaluate the extended ``kind`` Laplacian (``"rw"``, ``"unnorm"``, ``"norm"``) at ``x``.

    ``f_samples`` are the values ``f(X_j)`` and ``f_at_x`` is ``f(x)``.
    """
    f = _samples(g, f_samples)
    idx, kt = g._kernel_row(x)
    n, h2 = g.n, g.h * g.h
    fx = float(f_at_x)
    if kind == "rw":
        d = math.fsum(kt) / n
        return math.fsum(kt * (fx - f[idx])) / n / d / h2
    if kind == "unnorm":
        return math.fsum(kt * (fx - f[idx])) / n / h2
    if kind == "norm":
        d = math.fsum(kt) / n
        dn = g.reweighted_degrees[idx]
        bad = idx[dn <= 0]
        if bad.size:
            raise IsolatedVertexError(bad[0], f"zero reweighted degree at neighbor {bad[0]}")
        sd = math.sqrt(d)
        return math.fsum(kt * (fx / sd - f[idx] / np.sqrt(dn))) / n / (h2 * sd)
    raise ValueError(f"unknown Laplacian kind {kind!r}; expected one of {KINDS}")


def dirichlet_energy(g: NeighborhoodGraph, f_samples) -> float:
    """Discrete smoothness ``<f, L_u f>_V`` on the reweighted graph (no ``1/h^2``).

    Equals ``1/(2 n^2) sum_ij w_ij (f_i - f_j)^2``.
    """
    f = _samples(g, f_samples)
    W = g.reweighted_weights.tocoo()
    terms = W.data * (f[W.row] - f[W.col]) ** 2
    return math.fsum(terms) / (2.0 * g.n**2)
