import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from laplace_limits.kernel import (KernelProfile, cubic_taper, eval_profile, get_kernel, moments,
                                   register_kernel, registered_kernels, scaled_eval, validate_kernel)


def test_eval_profile_examples():
    assert eval_profile(cubic_taper, 0.0) == 0.0
    assert eval_profile(cubic_taper, 0.25) == pytest.approx(0.421875, abs=1e-15)
    assert eval_profile(cubic_taper, 4.0) == 0.0
    assert eval_profile(cubic_taper, 1.0) == 0.0


def test_eval_profile_rejects_negative():
    with pytest.raises(ValueError):
        eval_profile(cubic_taper, -1e-3)


def test_scaled_eval_examples():
    assert scaled_eval(cubic_taper, 1.0, 1, 0.25) == pytest.approx(0.421875, abs=1e-15)
    assert scaled_eval(cubic_taper, 2.0, 1, 1.0) == pytest.approx(0.2109375, abs=1e-15)
    assert np.all(scaled_eval(cubic_taper, 0.5, 2, np.array([0.26, 1.0, 9.0])) == 0)
    with pytest.raises(ValueError):
        scaled_eval(cubic_taper, 0.0, 1, 0.1)
    with pytest.raises(ValueError):
        scaled_eval(cubic_taper, -1.0, 1, 0.1)


@given(h=st.floats(0.05, 5.0), m=st.integers(1, 4), t=st.floats(0.0, 30.0))
def test_scaled_eval_identity(h, m, t):
    assert scaled_eval(cubic_taper, h, m, t) * h**m == pytest.approx(eval_profile(cubic_taper, t / h**2), rel=1e-14)


def _moments_sympy(m):
    # exact radial integrals of the cubic taper
    import sympy as sp

    r = sp.symbols("r", positive=True)
    area = 2 * sp.pi ** sp.Rational(m, 2) / sp.gamma(sp.Rational(m, 2))
    k = (1 - r**2) ** 3
    c1 = area * sp.integrate(k * r ** (m - 1), (r, 0, 1))
    c2 = area / m * sp.integrate(k * r ** (m + 1), (r, 0, 1))
    return float(c1), float(c2)


def test_moments_m1_closed_form():
    mom = moments(cubic_taper, 1)
    assert mom.c1 == pytest.approx(32 / 35, abs=1e-9)
    assert mom.c2 == pytest.approx(32 / 315, abs=1e-9)
    assert mom.c2 / mom.c1 == pytest.approx(1 / 9, abs=1e-10)


def test_moments_m2_regression():
    # frozen after computing with an exact symbolic integration
    mom = moments(cubic_taper, 2)
    assert mom.c1 == pytest.approx(math.pi / 4, abs=1e-10)
    assert mom.c2 == pytest.approx(math.pi / 40, abs=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_moments_match_symbolic(m):
    c1, c2 = _moments_sympy(m)
    mom = moments(cubic_taper, m)
    assert mom.c1 == pytest.approx(c1, abs=1e-10)
    assert mom.c2 == pytest.approx(c2, abs=1e-10)
    assert mom.dim == m


def test_moments_m2_against_cartesian_quadrature():
    def integrand(y, x, power):
        t = x * x + y * y
        return eval_profile(cubic_taper, t) * x**power

    lim = lambda x: math.sqrt(max(0.0, 1 - x * x))
    c1 = integrate.dblquad(integrand, -1, 1, lambda x: -lim(x), lim, args=(0,), epsabs=1e-12)[0]
    c2 = integrate.dblquad(integrand, -1, 1, lambda x: -lim(x), lim, args=(2,), epsabs=1e-12)[0]
    mom = moments(cubic_taper, 2)
    assert mom.c1 == pytest.approx(c1, abs=1e-9)
    assert mom.c2 == pytest.approx(c2, abs=1e-9)


def test_moments_stable_under_tighter_tolerance():
    a = moments(cubic_taper, 2)
    b = moments(cubic_taper, 2, tol=1e-12)
    assert abs(a.c1 - b.c1) < 1e-9 and abs(a.c2 - b.c2) < 1e-9


@given(alpha=st.floats(0.1, 10.0))
def test_moments_linear_in_scale(alpha):
    scaled = KernelProfile("scaled", lambda t: alpha * (1.0 - t) ** 3)
    base, other = moments(cubic_taper, 1), moments(scaled, 1)
    assert other.c1 == pytest.approx(alpha * base.c1, rel=1e-9)
    assert other.c2 == pytest.approx(alpha * base.c2, rel=1e-9)


def test_moments_reject_bad_dimension():
    with pytest.raises(ValueError):
        moments(cubic_taper, 0)


def test_validate_kernel():
    assert validate_kernel(cubic_taper) == []
    bump = KernelProfile("bump", lambda t: (1.0 - t) ** 3, value_at_zero=1.0)
    assert "value_at_zero" in validate_kernel(bump)
    rising = KernelProfile("rising", lambda t: t)
    assert "non-increasing" in validate_kernel(rising)
    negative = KernelProfile("neg", lambda t: t - 0.5)
    assert "non-negative" in validate_kernel(negative)
    gauss = KernelProfile("gauss", lambda t: np.exp(-t), support_radius=math.inf)
    assert "compact-support" in validate_kernel(gauss)


def test_registry():
    assert "cubic_taper" in registered_kernels()
    assert get_kernel("cubic_taper") is cubic_taper
    with pytest.raises(KeyError, match="cubic_taper"):
        get_kernel("gaussian")
    box = KernelProfile("test_box", lambda t: np.ones_like(t))
    register_kernel(box)
    assert get_kernel("test_box") is box
