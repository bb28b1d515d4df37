from __future__ import annotations

import pytest

# lines printed by the acceptance suite, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_line():
    def rec(line: str) -> None:
        print(line)
        ACCEPTANCE_LINES.append(line)
    return rec
