"""Closed-form continuum limits of the extended graph Laplacians.

With ``s = 2 (1 - lam)`` and kernel moments ``C1``, ``C2``:

    rw      ->  -(C2 / 2 C1) Delta_s f
    unnorm  ->  -(C2 / 2 C1^(2 lam)) p^(1 - 2 lam) Delta_s f
    norm    ->  -(C2 / 2 C1) p^(1/2 - lam) Delta_s (f / p^(1/2 - lam))

where ``Delta_s = Delta_M + (s/p) <grad p, grad .>``. Note the sign: graph
Laplacians are positive semi-definite, ``Delta_M`` is negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from . import manifold as mf
from .kernel import KernelMoments, KernelProfile, moments as kernel_moments, scaled_eval
from .manifold import Chart, ManifoldModel

__all__ = [
    "LimitSpec",
    "weighted_laplacian",
    "limit_rw",
    "limit_unnorm",
    "limit_norm",
    "limit",
    "limit_at",
    "curvature_term_sphere",
    "ConvolutionResult",
    "convolution_expansion",
]


@dataclass(frozen=True)
class LimitSpec:
    lam: float
    moments: KernelMoments
    model: ManifoldModel

    @property
    def s(self) -> float:
        return 2.0 * (1.0 - self.lam)

    @classmethod
    def from_s(cls, s: float, moments: KernelMoments, model: ManifoldModel) -> "LimitSpec":
        return cls(lam=1.0 - s / 2.0, moments=moments, model=model)

    @classmethod
    def for_kernel(cls, lam: float, kernel: KernelProfile, model: ManifoldModel) -> "LimitSpec":
        return cls(lam=lam, moments=kernel_moments(kernel, model.intrinsic_dim), model=model)


def _density_at(model: ManifoldModel, chart: Chart, u) -> float:
    p = float(model.density(chart.embed(np.asarray(u, dtype=float))[None, :])[0])
    if not p > 0:
        raise ValueError(f"density must be positive at the evaluation point, got {p}")
    return p


def weighted_laplacian(spec: LimitSpec, f, u, chart: Optional[Chart] = None) -> float:
    """``Delta_s f(u) = Delta_M f + (s/p) g^{ij} d_i p d_j f``."""
    chart = spec.model.charts[0] if chart is None else chart
    lb = mf.laplace_beltrami_chart(spec.model, f, u, chart)
    return lb + mf.weighted_gradient_term(spec.model, f, u, spec.s, chart)


def limit_rw(spec: LimitSpec, f, u, chart: Optional[Chart] = None) -> float:
    c = spec.moments
    return -(c.c2 / (2.0 * c.c1)) * weighted_laplacian(spec, f, u, chart)


def limit_unnorm(spec: LimitSpec, f, u, chart: Optional[Chart] = None) -> float:
    chart = spec.model.charts[0] if chart is None else chart
    c = spec.moments
    p = _density_at(spec.model, chart, u)
    pref = c.c2 / (2.0 * c.c1 ** (2.0 * spec.lam)) * p ** (1.0 - 2.0 * spec.lam)
    return -pref * weighted_laplacian(spec, f, u, chart)


def limit_norm(spec: LimitSpec, f, u, chart: Optional[Chart] = None, method: str = "composed") -> float:
    """Limit of the normalized Laplacian.

    ``method="composed"`` differentiates ``f / p^a`` (``a = 1/2 - lam``) numerically;
    ``method="expanded"`` uses

        Delta_M f + (1/p) <grad p, grad f> - a^2 f |grad p|^2 / p^2 - a f Delta_M p / p.
    """
    model = spec.model
    chart = model.charts[0] if chart is None else chart
    c = spec.moments
    u = np.asarray(u, dtype=float)
    a = 0.5 - spec.lam
    p = _density_at(model, chart, u)
    if method == "composed":
        def inner(x):
            return f(x) / model.density(x) ** a

        return -(c.c2 / (2.0 * c.c1)) * p**a * weighted_laplacian(spec, inner, u, chart)
    if method == "expanded":
        fu = float(np.asarray(f(chart.embed(u)[None, :])).ravel()[0])
        ginv = np.linalg.inv(mf.metric(chart, u))
        dp = mf.density_chart_gradient(model, u, chart)
        df = mf.gradient_chart(model, f, u, chart)
        lap_f = mf.laplace_beltrami_chart(model, f, u, chart)
        lap_p = mf.laplace_beltrami_chart(model, model.density, u, chart)
        val = (
            lap_f
            + float(dp @ ginv @ df) / p
            - a * a * fu * float(dp @ ginv @ dp) / p**2
            - a * fu * lap_p / p
        )
        return -(c.c2 / (2.0 * c.c1)) * val
    raise ValueError(f"unknown method {method!r}")


_LIMITS = {"rw": limit_rw, "unnorm": limit_unnorm, "norm": limit_norm}


def limit(spec: LimitSpec, kind: str, f, u, chart: Optional[Chart] = None) -> float:
    try:
        fn = _LIMITS[kind]
    except KeyError:
        raise ValueError(f"unknown Laplacian kind {kind!r}") from None
    return fn(spec, f, u, chart)


def limit_at(spec: LimitSpec, kind: str, f, x) -> float:
    """Limit at an ambient point, using the model's preferred chart there."""
    chart, u = spec.model.chart_of(np.asarray(x, dtype=float))
    return limit(spec, kind, f, u, chart)


def curvature_term_sphere(r: float, m: int) -> float:
    """``S = (1/2)[-R + |sum_a Pi(e_a, e_a)|^2 / 2]`` for the round ``m``-sphere of radius ``r``.

    Uses ``R = m(m-1)/r^2`` and ``|sum_a Pi(e_a, e_a)|^2 = m^2/r^2``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if math.isinf(r):
        return 0.0
    return 0.5 * (-m * (m - 1) / r**2 + 0.5 * m * m / r**2)


@dataclass(frozen=True)
class ConvolutionResult:
    quadrature_value: float
    expansion_value: float
    quadrature_error: float

    @property
    def residual(self) -> float:
        return abs(self.quadrature_value - self.expansion_value)


def _polar_quadrature(model, kernel, h, f, x, nodes):
    """``int k_h(|x - y|^2) f(y) p(y) dV(y)`` in polar coordinates around ``x``.

    Flat models use Euclidean polar coordinates; spheres use geodesic polar
    coordinates, where ``|x - y|^2 = 2 r^2 (1 - cos psi)`` and
    ``dV = r^2 sin psi dpsi dalpha``. Gauss-Legendre in the radial variable,
    the trapezoidal rule (spectrally accurate) in the angle.
    """
    m = model.intrinsic_dim
    R = h * kernel.support_radius
    t, w = roots_legendre(nodes)
    alpha = 2 * math.pi * np.arange(2 * nodes) / (2 * nodes)
    w_alpha = 2 * math.pi / (2 * nodes)
    x = np.asarray(x, dtype=float)
    if model.geometry == "flat":
        rho = 0.5 * R * (t + 1.0)
        w_rho = 0.5 * R * w
        dirs = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
        y = x + rho[:, None, None] * dirs[None, :, :]
        sq = np.broadcast_to((rho**2)[:, None], y.shape[:2])
        jac = np.broadcast_to(rho[:, None], y.shape[:2])
    elif model.geometry == "sphere":
        r = model.radius
        if R >= 2 * r:
            raise ValueError("kernel support exceeds the sphere diameter")
        psi_max = 2.0 * math.asin(R / (2.0 * r))
        psi = 0.5 * psi_max * (t + 1.0)
        w_rho = 0.5 * psi_max * w
        n0 = x / np.linalg.norm(x)
        # orthonormal tangent frame at x
        helper = np.array([1.0, 0.0, 0.0]) if abs(n0[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = helper - helper @ n0 * n0
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n0, e1)
        tang = np.cos(alpha)[:, None] * e1 + np.sin(alpha)[:, None] * e2
        y = r * (np.cos(psi)[:, None, None] * n0 + np.sin(psi)[:, None, None] * tang[None, :, :])
        sq = np.broadcast_to((2 * r * r * (1 - np.cos(psi)))[:, None], y.shape[:2])
        jac = np.broadcast_to((r * r * np.sin(psi))[:, None], y.shape[:2])
    else:
        raise ValueError(f"no convolution quadrature for geometry {model.geometry!r}")
    flat_y = y.reshape(-1, y.shape[-1])
    vals = (
        scaled_eval(kernel, h, m, sq).reshape(-1)
        * np.asarray(f(flat_y), dtype=float)
        * np.asarray(model.density(flat_y), dtype=float)
        * jac.reshape(-1)
    ).reshape(y.shape[:2])
    return float(w_rho @ vals.sum(axis=1) * w_alpha)


def convolution_expansion(model: ManifoldModel, kernel: KernelProfile, f, x, h: float,
                          nodes: int = 64) -> ConvolutionResult:
    """Compare the kernel convolution of ``f p`` at ``x`` with its second-order expansion

        C1 p f + (h^2/2) C2 (p f S + Delta_M (p f)).

    The quadrature is repeated with twice the nodes; the difference is the
    reported quadrature error, and a large one raises ``ArithmeticError``.
    """
    x = np.asarray(x, dtype=float)
    mom = kernel_moments(kernel, model.intrinsic_dim)
    q1 = _polar_quadrature(model, kernel, h, f, x, nodes)
    q2 = _polar_quadrature(model, kernel, h, f, x, 2 * nodes)
    err = abs(q2 - q1)
    if err > 1e-8 * max(1.0, abs(q2)):
        raise ArithmeticError(f"convolution quadrature did not converge (estimate {err:g})")

    chart, u = model.chart_of(x)
    S = 0.0 if model.geometry == "flat" else curvature_term_sphere(model.radius, model.intrinsic_dim)

    def pf(y):
        return np.asarray(f(y), dtype=float) * np.asarray(model.density(y), dtype=float)

    pf_x = float(pf(x[None, :])[0])
    lap_pf = mf.laplace_beltrami_chart(model, pf, u, chart)
    expansion = mom.c1 * pf_x + 0.5 * h * h * mom.c2 * (pf_x * S + lap_pf)
    return ConvolutionResult(quadrature_value=q2, expansion_value=expansion, quadrature_error=err)
