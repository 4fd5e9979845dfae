import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from jostexp import ChannelSet, NoroTaylorPotential, SolverSettings, ZeroPotential, integrate_coefficients

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Results printed by tests/test_acceptance.py, repeated in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Log one pass/fail line for an acceptance criterion; returns the verdict."""

    def _record(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


@pytest.fixture(scope="session")
def bench():
    """Two-channel benchmark: thresholds 0 and 0.1, unit masses, s-waves."""
    return ChannelSet.from_lists([0.0, 0.1]), NoroTaylorPotential(), SolverSettings()


@pytest.fixture(scope="session")
def free2():
    return ChannelSet.from_lists([0.0, 0.1]), ZeroPotential(2), SolverSettings()


@pytest.fixture(scope="session")
def table_real(bench):
    """Expansion around E0 = 5 up to tenth order."""
    cs, p, s = bench
    return integrate_coefficients(cs, p, 5.0, 10, s)


@pytest.fixture(scope="session")
def table_complex(bench):
    """Expansion around E0 = 7.5 - 2i up to tenth order."""
    cs, p, s = bench
    return integrate_coefficients(cs, p, 7.5 - 2.0j, 10, s)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
