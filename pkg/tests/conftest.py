import pytest

from randflight.sampling import RngStream

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RngStream(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
