import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unitary(rng, d):
    """Oracle Haar sampler independent of the package."""
    from scipy.stats import unitary_group

    return unitary_group.rvs(d, random_state=rng)


def random_state(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    x = g @ g.conj().T
    return x / np.trace(x).real


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail, elapsed, budget):
    """Print and keep one pass/fail line for an acceptance criterion."""
    within = elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {number}: {detail} [{elapsed:.1f}s of {budget:.0f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok and within


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
