"""Residual of the second-order kernel convolution expansion as h shrinks.

    python scripts/convolution_residuals.py

Prints |quadrature - expansion| for several (model, f, x) cases and the ratio
between successive halvings of h. A ratio near 8 means an h^3 remainder,
near 16 an h^4 remainder. On the round sphere with constant f and uniform
density the expansion is exact, so the residual is pure rounding noise.
"""
import math

import numpy as np

from laplace_limits import manifold as mf
from laplace_limits.functions import constant_one, paper_affine, paper_sine, sphere_costheta
from laplace_limits.kernel import cubic_taper
from laplace_limits.oracle import convolution_expansion


def sph(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


CASES = [
    ("sphere_uniform", "constant", constant_one, np.array([0.0, 0.0, 1.0])),
    ("sphere_uniform", "sphere_costheta", sphere_costheta, sph(1.0, 0.3)),
    ("sphere_cluster", "constant", constant_one, sph(0.7, 2.0)),
    ("sphere_cluster", "sphere_costheta", sphere_costheta, sph(1.0, 0.5)),
    ("gauss2", "paper_affine", paper_affine, np.array([0.3, -0.4])),
    ("gauss2", "paper_sine", paper_sine, np.array([0.5, 0.2])),
]


def main():
    hs = [0.4, 0.2, 0.1, 0.05]
    print(f"{'model':16s} {'f':16s} " + " ".join(f"h={h:<9g}" for h in hs) + "  ratios")
    for model_name, fname, f, x in CASES:
        model = mf.get_model(model_name)
        res = [convolution_expansion(model, cubic_taper, f, x, h).residual for h in hs]
        ratios = [a / b if b > 0 else math.inf for a, b in zip(res, res[1:])]
        print(f"{model_name:16s} {fname:16s} " + " ".join(f"{r:<11.3e}" for r in res)
              + "  " + " ".join(f"{q:.3g}" for q in ratios))


if __name__ == "__main__":
    main()
