import pytest

ACCEPTANCE_LINES = {}


@pytest.fixture
def record_criterion():
    """Store one summary line per acceptance criterion; printed at the end of the run."""

    def record(number, ok, text):
        line = f"CRITERION {number} {'PASS' if ok else 'FAIL'}: {text}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
