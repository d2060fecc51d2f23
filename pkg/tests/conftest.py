import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path_factory, monkeypatch, request):
    """Unit tests get a private cache directory; acceptance tests keep the user cache."""
    if request.node.get_closest_marker("acceptance") is None:
        monkeypatch.setenv("REPCAT_CACHE_DIR", str(tmp_path_factory.getbasetemp() / "cache"))
    monkeypatch.delenv("REPCAT_NO_GENERATE", raising=False)


@pytest.fixture
def report():
    """Record one acceptance line, then assert it."""
    def _report(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        assert ok, detail
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
