import os

import pytest

# subprocesses (CLI runs, process pools) inherit checked mode through the env
os.environ.setdefault("CORDON_CHECKED", "1")

from cordon import maxflow  # noqa: E402

maxflow.set_checked(True)

_criteria = []


@pytest.fixture
def record_criterion():
    """Log one acceptance criterion outcome; printed again in the terminal summary."""

    def record(number, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _criteria.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
    stats = maxflow.check_stats
    terminalreporter.section("flow checks")
    terminalreporter.write_line(
        f"solves={stats['solves']} duality_checks={stats['duality_checks']} violations={stats['violations']}")


def pytest_sessionfinish(session, exitstatus):
    if maxflow.check_stats["violations"] and exitstatus == 0:
        session.exitstatus = 1
