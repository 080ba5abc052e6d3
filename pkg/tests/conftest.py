import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def cmat(rng: np.random.Generator, n: int, m: int | None = None) -> np.ndarray:
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(cmat(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def match_multisets(x, y, tol):
    """Greedy matching; returns the largest distance between matched pairs."""
    y = list(y)
    worst = 0.0
    for v in x:
        k = int(np.argmin([abs(v - w) for w in y]))
        worst = max(worst, abs(v - y.pop(k)) / max(1.0, abs(v)))
    return worst


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import pytest_terminal_summary_lines
    except ImportError:
        return
    lines = pytest_terminal_summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
