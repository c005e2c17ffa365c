import pytest

_verdicts = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line: verdict(label, ok, detail)."""
    lines = request.config.stash.setdefault(_verdicts, [])

    def record(label: str, ok: bool, detail: str = ""):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_verdicts, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
