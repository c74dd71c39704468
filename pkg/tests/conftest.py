import pytest

from robust_l0 import noisy_dataset

from acceptance_log import LINES as ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def rand5_small():
    """100 groups in R^5, 1..20 near-duplicates each."""
    return noisy_dataset(100, 5, 1, "uniform", 20)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
