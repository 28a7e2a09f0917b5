import pytest

from suspcond.eisenstein import EisensteinEvaluator

#: one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def evaluator():
    return EisensteinEvaluator()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
