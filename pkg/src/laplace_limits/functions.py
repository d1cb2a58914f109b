"""Named test functions on ambient points, vectorized ``(k, d) -> (k,)``."""
from __future__ import annotations

from typing import Callable, Dict

import numpy as np

__all__ = ["paper_sine", "paper_affine", "sphere_costheta", "constant_one", "get_function",
           "registered_functions"]


def paper_sine(x):
    """``sin(|x|^2 / 2) / |x|^2``, continued by 1/2 at the origin."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r2 = np.sum(x * x, axis=-1)
    out = np.full(r2.shape, 0.5)
    nz = r2 > 0
    out[nz] = np.sin(0.5 * r2[nz]) / r2[nz]
    return out


def paper_affine(x):
    """``sum_i x_i - 4``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sum(x, axis=-1) - 4.0


def sphere_costheta(x):
    """``cos(theta)`` with respect to the z-axis, i.e. ``z / |x|``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return x[..., 2] / np.linalg.norm(x, axis=-1)


def constant_one(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.ones(x.shape[0])


_FUNCTIONS: Dict[str, Callable] = {
    "paper_sine": paper_sine,
    "paper_affine": paper_affine,
    "sphere_costheta": sphere_costheta,
    "constant": constant_one,
}


def registered_functions():
    return sorted(_FUNCTIONS)


def get_function(name: str):
    try:
        return _FUNCTIONS[name]
    except KeyError:
        raise KeyError(f"unknown function {name!r}; available: {', '.join(registered_functions())}") from None
