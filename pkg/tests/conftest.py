import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, passed, detail)``; ``passed=None`` means skipped."""

    def record(n, passed, detail):
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        line = f"criterion {n}: {status}  {detail}"
        _CRITERIA.append((n, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
