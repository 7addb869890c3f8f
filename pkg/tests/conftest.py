import pytest

from cpquench.core import PhysicalConfig
from cpquench import modesum

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref_cfg():
    return PhysicalConfig()


@pytest.fixture(scope="session")
def small_grid():
    return modesum.build_mode_grid(1.0e-6, 8)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
