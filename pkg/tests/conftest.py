import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dichospec.corpus import get_example

settings.register_profile("dichospec", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dichospec")


@pytest.fixture(scope="session")
def ex731():
    return get_example("ex731", {"omega": 2.0, "a": 1.0})


@pytest.fixture(scope="session")
def ex707():
    return get_example("ex707")


@pytest.fixture(scope="session")
def ex708():
    return get_example("ex708", {"omega": 2.0, "a": 0.8})


@pytest.fixture(scope="session")
def ex718():
    return get_example("ex718")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def scalar(M, s):
    """Plain value of a 1x1 scaled pair."""
    return float(M[0, 0]) * np.exp(s)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per criterion; printed again in the terminal summary."""
    def _report(number, title, checks):
        ok = all(c[1] for c in checks)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({info})" for name, good, info in checks)
        line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
