"""Shared pytest wiring.

The acceptance module records one line per end-to-end check; printing them
from a terminal-summary hook keeps the scoreboard visible even though pytest
captures per-test output.
"""

scoreboard_lines = []


def pytest_terminal_summary(terminalreporter):
    if scoreboard_lines:
        terminalreporter.section("acceptance scoreboard")
        for line in scoreboard_lines:
            terminalreporter.write_line(line)
