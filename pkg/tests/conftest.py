import pytest

_VERDICTS = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record a one-line pass/fail verdict for an acceptance criterion."""
    table = request.config.stash.setdefault(_VERDICTS, {})

    def record(number: int, ok: bool, detail: str):
        table[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_VERDICTS, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        terminalreporter.write_line(table[number])
