from __future__ import annotations

import pytest

from helpers import ACCEPTANCE, FIG2
from invguide.driver import prepare
from invguide.program import parse


@pytest.fixture
def fig2():
    return parse(FIG2)


@pytest.fixture
def fig2_marked():
    """(program, goal) with A before the loop (line 2), B at the body start (line 4), goal on line 6."""
    return prepare(parse(FIG2))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
