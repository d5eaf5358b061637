import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = []


@pytest.fixture
def record(capsys):
    """Print and keep one PASS/FAIL line per acceptance criterion."""
    def rec(name, ok, detail):
        line = f"{name}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return rec


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
