from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
GOLDEN_PREFIX = "GOLD_2012-06-21_34200000_57600000"

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def golden_paths():
    return (DATA / f"{GOLDEN_PREFIX}_message_1.csv", DATA / f"{GOLDEN_PREFIX}_orderbook_1.csv")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
