import os

import pytest
from hypothesis import HealthCheck, settings

from artifact import counting

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

RADII = (10, 15, 20, 25, 30, 40)


@pytest.fixture(scope="session")
def count_runs():
    """The T = 40 enumeration for the reference cubic at 1, 2 and 8 workers."""
    p = counting.DELTA49_POLY
    return {k: counting.enumerate_rows(p, max(RADII), threads=k) for k in (1, 2, 8)}


# ---------------------------------------------------------------- acceptance report

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA.setdefault(mark.args[0], []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        tests = _CRITERIA[k]
        failed = [name for name, ok in tests if not ok]
        status = "FAIL" if failed else "PASS"
        extra = f" ({', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {k:2d}: {status}{extra}")
