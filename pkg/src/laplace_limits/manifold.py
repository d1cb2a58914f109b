"""Built-in manifold models, samplers and chart-based differential operators.

Functions and densities are evaluated on *ambient* points, vectorized over a
leading axis (``(k, d) -> (k,)``). Chart operators compose them with the chart
embedding, so a test function written in ambient coordinates can be
differentiated in any chart.

Densities are taken with respect to the natural volume element
``dV = sqrt(det g) du``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "Chart",
    "ManifoldModel",
    "OffManifoldError",
    "ChartDomainError",
    "get_model",
    "registered_models",
    "sample",
    "density_eval",
    "metric",
    "laplace_beltrami_chart",
    "gradient_chart",
    "density_chart_gradient",
    "weighted_gradient_term",
    "FD_STEP",
]

FD_STEP = 1e-4

AmbientFn = Callable[[np.ndarray], np.ndarray]


class OffManifoldError(ValueError):
    pass


class ChartDomainError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """A coordinate chart ``u -> x``; ``embed``/``jacobian`` accept ``(..., m)`` arrays."""

    name: str
    embed: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]  # (..., m) -> (..., d, m)
    coords: Callable[[np.ndarray], np.ndarray]  # (..., d) -> (..., m)
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        return bool(np.all(u >= lo) and np.all(u <= hi))


@dataclass(frozen=True)
class ManifoldModel:
    name: str
    intrinsic_dim: int
    ambient_dim: int
    charts: Tuple[Chart, ...]
    density: AmbientFn
    density_grad: AmbientFn  # ambient gradient of a smooth extension of the density
    sampler: Callable[[int, np.random.Generator], np.ndarray]
    boundary_distance: AmbientFn
    on_manifold: Callable[[np.ndarray], np.ndarray]
    chart_selector: Callable[[np.ndarray], int]
    geometry: str  # "flat" or "sphere"
    radius: float = math.inf

    def chart_for(self, x) -> Chart:
        return self.charts[self.chart_selector(np.asarray(x, dtype=float))]

    def chart_of(self, x) -> Tuple[Chart, np.ndarray]:
        chart = self.chart_for(x)
        return chart, chart.coords(np.asarray(x, dtype=float))

    def interior_test(self, x, margin: float) -> np.ndarray:
        return self.boundary_distance(np.atleast_2d(x)) > margin


# --------------------------------------------------------------------------- flat

def _identity_chart(name, lower, upper):
    return Chart(
        name=name,
        embed=lambda u: np.asarray(u, dtype=float),
        jacobian=lambda u: np.broadcast_to(np.eye(2), np.shape(u)[:-1] + (2, 2)),
        coords=lambda x: np.asarray(x, dtype=float),
        lower=lower,
        upper=upper,
    )


def _box2_uniform() -> ManifoldModel:
    half = 3.0

    def density(x):
        x = np.atleast_2d(x)
        inside = np.all(np.abs(x) <= half, axis=-1)
        return np.where(inside, 1.0 / (2 * half) ** 2, 0.0)

    def boundary_distance(x):
        x = np.atleast_2d(x)
        return np.min(half - np.abs(x), axis=-1)

    return ManifoldModel(
        name="box2_uniform",
        intrinsic_dim=2,
        ambient_dim=2,
        charts=(_identity_chart("cartesian", (-half, -half), (half, half)),),
        density=density,
        density_grad=lambda x: np.zeros_like(np.atleast_2d(x), dtype=float),
        sampler=lambda n, rng: rng.uniform(-half, half, size=(n, 2)),
        boundary_distance=boundary_distance,
        on_manifold=lambda x: np.all(np.abs(np.atleast_2d(x)) <= half, axis=-1),
        chart_selector=lambda x: 0,
        geometry="flat",
    )


def _gauss2() -> ManifoldModel:
    def density(x):
        x = np.atleast_2d(x)
        return np.exp(-0.5 * np.sum(x * x, axis=-1)) / (2 * math.pi)

    def density_grad(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return -x * density(x)[..., None]

    inf = math.inf
    return ManifoldModel(
        name="gauss2",
        intrinsic_dim=2,
        ambient_dim=2,
        charts=(_identity_chart("cartesian", (-inf, -inf), (inf, inf)),),
        density=density,
        density_grad=density_grad,
        sampler=lambda n, rng: rng.standard_normal(size=(n, 2)),
        boundary_distance=lambda x: np.full(np.atleast_2d(x).shape[0], inf),
        on_manifold=lambda x: np.all(np.isfinite(np.atleast_2d(x)), axis=-1),
        chart_selector=lambda x: 0,
        geometry="flat",
    )


# ------------------------------------------------------------------------- sphere

def _polar_chart(name: str, perm: Sequence[int]) -> Chart:
    """Spherical coordinates ``(theta, phi)`` whose polar axis is ambient axis ``perm[2]``."""
    perm = tuple(perm)
    inv = tuple(int(k) for k in np.argsort(perm))

    def embed(u):
        u = np.asarray(u, dtype=float)
        th, ph = u[..., 0], u[..., 1]
        local = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
        return local[..., inv]

    def jacobian(u):
        u = np.asarray(u, dtype=float)
        th, ph = u[..., 0], u[..., 1]
        d_th = np.stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)], axis=-1)
        d_ph = np.stack([-np.sin(th) * np.sin(ph), np.sin(th) * np.cos(ph), np.zeros_like(th)], axis=-1)
        return np.stack([d_th[..., inv], d_ph[..., inv]], axis=-1)

    def coords(x):
        x = np.asarray(x, dtype=float)
        local = x[..., perm]
        r = np.linalg.norm(local, axis=-1)
        th = np.arccos(np.clip(local[..., 2] / r, -1.0, 1.0))
        ph = np.mod(np.arctan2(local[..., 1], local[..., 0]), 2 * math.pi)
        return np.stack([th, ph], axis=-1)

    # phi is periodic; the bounds only guard theta against the poles
    return Chart(name=name, embed=embed, jacobian=jacobian, coords=coords,
                 lower=(0.0, -math.inf), upper=(math.pi, math.inf))


def _sphere_charts():
    return (_polar_chart("polar_z", (0, 1, 2)), _polar_chart("polar_x", (1, 2, 0)))


def _uniform_on_sphere(n, rng):
    v = rng.standard_normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _sphere_model(name, density, density_grad, sampler) -> ManifoldModel:
    def on_manifold(x):
        return np.abs(np.linalg.norm(np.atleast_2d(x), axis=-1) - 1.0) <= 1e-9

    return ManifoldModel(
        name=name,
        intrinsic_dim=2,
        ambient_dim=3,
        charts=_sphere_charts(),
        density=density,
        density_grad=density_grad,
        sampler=sampler,
        boundary_distance=lambda x: np.full(np.atleast_2d(x).shape[0], math.inf),
        on_manifold=on_manifold,
        # polar_z unless the point is within 45 degrees of the z-poles
        chart_selector=lambda x: 0 if abs(np.asarray(x)[2]) <= math.sqrt(0.5) else 1,
        geometry="sphere",
        radius=1.0,
    )


_P_MAX_CLUSTER = 1.0 / (2 * math.pi)


def _sphere_cluster() -> ManifoldModel:
    def density(x):
        x = np.atleast_2d(x)
        z = x[..., 2] / np.linalg.norm(x, axis=-1)
        return (1.0 + 3.0 * z * z) / (8 * math.pi)

    def density_grad(x):
        # gradient of the extension (1 + 3 z^2) / (8 pi); only its tangential part matters
        x = np.atleast_2d(np.asarray(x, dtype=float))
        g = np.zeros_like(x)
        g[..., 2] = 6.0 * x[..., 2] / (8 * math.pi)
        return g

    def sampler(n, rng):
        out = []
        have = 0
        while have < n:
            batch = max(64, 2 * (n - have) + 16)
            cand = _uniform_on_sphere(batch, rng)
            accept = rng.uniform(size=batch) * _P_MAX_CLUSTER < density(cand)
            out.append(cand[accept])
            have += int(accept.sum())
        return np.concatenate(out)[:n]

    return _sphere_model("sphere_cluster", density, density_grad, sampler)


def _sphere_uniform() -> ManifoldModel:
    return _sphere_model(
        "sphere_uniform",
        density=lambda x: np.full(np.atleast_2d(x).shape[0], 1.0 / (4 * math.pi)),
        density_grad=lambda x: np.zeros_like(np.atleast_2d(x), dtype=float),
        sampler=_uniform_on_sphere,
    )


_BUILDERS = {
    "box2_uniform": _box2_uniform,
    "gauss2": _gauss2,
    "sphere_cluster": _sphere_cluster,
    "sphere_uniform": _sphere_uniform,
}
_CACHE: dict = {}


def registered_models():
    return sorted(_BUILDERS)


def get_model(name: str) -> ManifoldModel:
    if name not in _BUILDERS:
        raise KeyError(f"unknown model {name!r}; available: {', '.join(registered_models())}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


# ---------------------------------------------------------------------- operations

def sample(model: ManifoldModel, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. ambient points; identical ``seed`` gives identical output."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(model.sampler(int(n), rng))


def density_eval(model: ManifoldModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.ambient_dim,):
        raise ValueError(f"point must have shape ({model.ambient_dim},)")
    if not model.on_manifold(x)[0]:
        raise OffManifoldError(f"{x.tolist()} is not on {model.name}")
    return float(model.density(x)[0])


def metric(chart: Chart, u) -> np.ndarray:
    J = chart.jacobian(np.asarray(u, dtype=float))
    return np.swapaxes(J, -1, -2) @ J


def _resolve(model: ManifoldModel, chart: Optional[Chart]) -> Chart:
    return model.charts[0] if chart is None else chart


def _check_stencil(chart: Chart, u, reach: float):
    if not chart.contains(u, margin=reach):
        raise ChartDomainError(f"finite-difference stencil around {np.asarray(u).tolist()} leaves chart {chart.name}")


def _partials(fc, u, step):
    m = u.size
    out = np.empty(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = step
        out[i] = (fc(u + e) - fc(u - e)) / (2 * step)
    return out


def _chart_fn(chart: Chart, f: AmbientFn):
    def fc(u):
        return float(np.asarray(f(chart.embed(u)[None, :])).ravel()[0])

    return fc


def gradient_chart(model: ManifoldModel, f: AmbientFn, u, chart: Optional[Chart] = None,
                   step: float = FD_STEP) -> np.ndarray:
    """Coordinate partials ``d_i (f o embed)(u)`` by central differences."""
    chart = _resolve(model, chart)
    u = np.asarray(u, dtype=float)
    _check_stencil(chart, u, step)
    return _partials(_chart_fn(chart, f), u, step)


def laplace_beltrami_chart(model: ManifoldModel, f: AmbientFn, u, chart: Optional[Chart] = None,
                           step: float = FD_STEP) -> float:
    """Laplace-Beltrami operator in divergence form, by nested central differences.

    ``(1/sqrt(det g)) d_j (sqrt(det g) g^{ij} d_i f)`` with flux evaluated at
    ``u +- step e_j``; truncation error is ``O(step^2)``.
    """
    chart = _resolve(model, chart)
    u = np.asarray(u, dtype=float)
    m = u.size
    _check_stencil(chart, u, 2 * step)
    fc = _chart_fn(chart, f)

    def flux(v, j):
        g = metric(chart, v)
        ginv = np.linalg.inv(g)
        return math.sqrt(np.linalg.det(g)) * float(ginv[j] @ _partials(fc, v, step))

    total = 0.0
    for j in range(m):
        e = np.zeros(m)
        e[j] = step
        total += (flux(u + e, j) - flux(u - e, j)) / (2 * step)
    return total / math.sqrt(np.linalg.det(metric(chart, u)))


def density_chart_gradient(model: ManifoldModel, u, chart: Chart) -> np.ndarray:
    """Analytic ``d_i (p o embed)(u)`` via the chain rule through the chart Jacobian."""
    x = chart.embed(u)[None, :]
    J = chart.jacobian(u)
    return np.asarray(model.density_grad(x))[0] @ J


def weighted_gradient_term(model: ManifoldModel, f: AmbientFn, u, s: float,
                           chart: Optional[Chart] = None, step: float = FD_STEP) -> float:
    """``(s/p) g^{ij} (d_i p)(d_j f)``; density derivatives are analytic."""
    chart = _resolve(model, chart)
    u = np.asarray(u, dtype=float)
    p = float(model.density(chart.embed(u)[None, :])[0])
    if not p > 0:
        raise ValueError(f"density must be positive, got {p}")
    if s == 0:
        return 0.0
    dp = density_chart_gradient(model, u, chart)
    df = gradient_chart(model, f, u, chart, step)
    ginv = np.linalg.inv(metric(chart, u))
    return s / p * float(dp @ ginv @ df)
