"""Compactly supported kernel profiles and their moment constants.

A profile ``k`` is a function of the *squared* distance ``t``. The scaled
kernel is ``k_h(t) = h**-m * k(t / h**2)``; the moments are

    C1 = int_{R^m} k(|y|^2) dy,      C2 = int_{R^m} k(|y|^2) y_1^2 dy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np
from scipy import integrate

__all__ = [
    "KernelProfile",
    "KernelMoments",
    "cubic_taper",
    "eval_profile",
    "scaled_eval",
    "moments",
    "validate_kernel",
    "register_kernel",
    "get_kernel",
    "registered_kernels",
]


@dataclass(frozen=True)
class KernelProfile:
    """Non-negative, non-increasing profile supported on ``[0, support_radius**2]``.

    ``func`` is evaluated on arrays of squared distances and may assume its
    argument lies in ``(0, support_radius**2]``; the zero at ``t = 0`` and the
    cut-off beyond the support are applied by :func:`eval_profile`.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    support_radius: float = 1.0
    value_at_zero: float = 0.0

    def __call__(self, t):
        return eval_profile(self, t)


@dataclass(frozen=True)
class KernelMoments:
    c1: float
    c2: float
    dim: int

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError(f"kernel moments must be positive, got c1={self.c1}, c2={self.c2}")


def _cubic(t):
    return (1.0 - t) ** 3


cubic_taper = KernelProfile(name="cubic_taper", func=_cubic, support_radius=1.0)

_REGISTRY: Dict[str, KernelProfile] = {"cubic_taper": cubic_taper}


def register_kernel(kernel: KernelProfile) -> None:
    _REGISTRY[kernel.name] = kernel


def registered_kernels() -> List[str]:
    return sorted(_REGISTRY)


def get_kernel(name: str) -> KernelProfile:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown kernel {name!r}; registered kernels: {', '.join(registered_kernels())}"
        ) from None


def eval_profile(k: KernelProfile, t):
    """Evaluate ``k(t)``; exactly zero at ``t == 0`` and for ``t > R_k**2``.

    Accepts a scalar or an array; negative arguments raise ``ValueError``.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("kernel argument must be non-negative")
    inside = (arr > 0) & (arr <= k.support_radius**2)
    out = np.zeros_like(arr)
    if np.any(inside):
        out[inside] = k.func(arr[inside])
    if out.ndim == 0:
        return float(out)
    return out


def scaled_eval(k: KernelProfile, h: float, m: int, sq_dist):
    """``h**-m * k(sq_dist / h**2)``."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return eval_profile(k, np.asarray(sq_dist, dtype=float) / h**2) / h**m


def _sphere_area(m: int) -> float:
    # surface area of the unit (m-1)-sphere in R^m
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def moments(k: KernelProfile, m: int, tol: float = 1e-10) -> KernelMoments:
    """Compute ``C1``, ``C2`` for intrinsic dimension ``m`` via the radial reduction.

    ``C1 = w_{m-1} int_0^R k(r^2) r^(m-1) dr`` and
    ``C2 = (w_{m-1}/m) int_0^R k(r^2) r^(m+1) dr``.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"dimension must be a positive integer, got {m}")
    m = int(m)
    R = k.support_radius
    area = _sphere_area(m)

    def radial(power):
        val, err = integrate.quad(
            lambda r: eval_profile(k, r * r) * r**power, 0.0, R, epsabs=tol, epsrel=0.0, limit=200
        )
        if not math.isfinite(val) or err > 10 * tol:
            raise ValueError(f"moment quadrature for kernel {k.name!r} did not converge (err={err})")
        return val

    c1 = area * radial(m - 1)
    c2 = area / m * radial(m + 1)
    return KernelMoments(c1=c1, c2=c2, dim=m)


def validate_kernel(k: KernelProfile, n_grid: int = 2001) -> List[str]:
    """Return the list of violated kernel assumptions (empty when the profile is admissible).

    Possible entries: ``"value_at_zero"``, ``"non-negative"``, ``"non-increasing"``,
    ``"compact-support"``.
    """
    violations = []
    if not math.isfinite(k.support_radius):
        violations.append("compact-support")
        R2 = 1.0
    else:
        R2 = k.support_radius**2
    if k.value_at_zero != 0.0 or _raw(k, 0.0) != 0.0:
        violations.append("value_at_zero")
    t = np.linspace(0.0, 2.0 * R2, n_grid)[1:]
    vals = np.array([_raw(k, ti) for ti in t])
    if np.any(vals < 0):
        violations.append("non-negative")
    if np.any(np.diff(vals) > 1e-14 * max(1.0, np.max(np.abs(vals)))):
        violations.append("non-increasing")
    if "compact-support" not in violations and np.any(vals[t > R2] != 0):
        violations.append("compact-support")
    return violations


def _raw(k: KernelProfile, t: float) -> float:
    # The profile as declared: value_at_zero at 0, func on (0, R^2], 0 beyond.
    if t == 0:
        return k.value_at_zero
    if t > k.support_radius**2:
        return 0.0
    return float(k.func(np.asarray(t)))
