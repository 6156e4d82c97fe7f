import numpy as np
import pytest

from semimix.core import VarianceProfile


def semicircle_density(x, K=1.0):
    """Real-axis density of the semicircle with variance K (radius 2*sqrt(K))."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.clip(4 * K - x**2, 0, None)) / (2 * np.pi * K)


def semicircle_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), -2, 2)
    return 0.5 + x * np.sqrt(4 - x**2) / (4 * np.pi) + np.arcsin(x / 2) / np.pi


def semicircle_samples(n, rng):
    """Inverse-CDF samples of the standard semicircle by bisection."""
    u = rng.random(n)
    lo, hi = np.full(n, -2.0), np.full(n, 2.0)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def random_profile(rng, d, scale=1.0):
    a = rng.random((d, d)) * scale
    return VarianceProfile(np.triu(a) + np.triu(a, 1).T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary so the
# pass/fail table is visible even when output capture is on
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
