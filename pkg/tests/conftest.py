import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hurwitz(rng, n, margin=0.1):
    """Random dense matrix shifted so that its spectral abscissa is -margin."""
    M = rng.normal(size=(n, n))
    a = np.max(np.linalg.eigvals(M).real)
    return M - (a + margin) * np.eye(n)


def random_invertible(rng, n, low=-2.0, high=2.0, cond_max=1e6):
    while True:
        M = rng.uniform(low, high, size=(n, n))
        if np.linalg.cond(M) < cond_max:
            return M


ACCEPTANCE = []


def record(criterion, ok, detail):
    """Register one acceptance verdict; printed in the terminal summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
