import pytest

RESULTS = {}


@pytest.fixture
def record():
    """Store one pass/fail line per acceptance criterion for the summary."""

    def _record(n, ok, detail):
        RESULTS[n] = (bool(ok), detail)
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
