import pytest

from speedsched import Job

# arrival / duration / urgent flag of the six-job worked example
WORKED_JOBS = [(0, 0, 5, False), (1, 1, 5, False), (2, 2, 3, True), (3, 3, 4, True), (4, 4, 3, False), (5, 5, 5, True)]
WORKED_ORDER = [0, 5, 3, 2, 4, 1]


@pytest.fixture
def worked_jobs():
    return [Job(i, a, d, u) for i, a, d, u in WORKED_JOBS]


# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (len(s.split(":")[0]), s)):
            terminalreporter.write_line(line)
