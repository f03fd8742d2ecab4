import numpy as np
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=4)


def spd(seed, n, spread=0.5):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(G)
    return (Q * np.exp(spread * rng.standard_normal(n))) @ Q.T


# Filled by the acceptance tests and printed after the run, so every
# criterion shows its PASS/FAIL line even when output capture is on.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
