import numpy as np
import pytest

# one pass/fail line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(number: int, name: str, passed: bool, detail: str):
    ACCEPTANCE_LINES.append(
        (number, f"ACCEPTANCE {number:2d} [{name}]: "
                 f"{'PASS' if passed else 'FAIL'} — {detail}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
