import os
import sys

import pytest
from hypothesis import HealthCheck, settings

import lcspec

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "lcspec", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lcspec")


@pytest.fixture(scope="session")
def p04():
    return lcspec.power_law(0.0, 4.0)


@pytest.fixture(scope="session")
def p22():
    return lcspec.power_law(2.0, 2.0)


@pytest.fixture(scope="session")
def pm14():
    return lcspec.power_law(-1.0, 4.0)


@pytest.fixture(scope="session")
def expo():
    return lcspec.exponential(1.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, text = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {text}")
