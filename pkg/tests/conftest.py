import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def weight_matrices(draw, min_n=2, max_n=50, symmetric=True, density=0.4):
    """Random non-negative weight matrices with no isolated vertex."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    W = rng.uniform(0.05, 2.0, size=(n, n)) * (rng.uniform(size=(n, n)) < density)
    np.fill_diagonal(W, 0.0)
    # a ring guarantees every vertex has an edge in both directions
    ring = np.arange(n)
    W[ring, (ring + 1) % n] += rng.uniform(0.1, 1.0, size=n)
    if symmetric:
        W = np.triu(W, 1)
        W = W + W.T
    return W


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
