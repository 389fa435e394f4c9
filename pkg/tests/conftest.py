"""Shared pytest plumbing for the acceptance battery.

Criterion verdicts are collected during the run and replayed after the
terminal summary, so the one-line-per-criterion report is visible even
though pytest captures stdout of passing tests.
"""
import pytest

_CRITERION_LINES = []


@pytest.fixture
def criterion_report():
    def record(name: str, passed: bool, detail: str) -> None:
        verdict = "PASS" if passed else "FAIL"
        _CRITERION_LINES.append(f"[{verdict}] {name}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
