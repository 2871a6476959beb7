"""Shared pytest hooks.

The acceptance tests register one summary line per criterion; the hook
below replays them after the test report so a plain `pytest -v` run shows
every pass/fail line even when stdout capturing is on.
"""

from __future__ import annotations

ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
