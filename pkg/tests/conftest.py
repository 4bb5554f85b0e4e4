import pytest

_RESULTS: list[tuple[str, bool, str]] = []


class Criterion:
    """Records one acceptance line and fails the test when the check fails."""

    def __init__(self, label: str) -> None:
        self.label = label

    def check(self, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {self.label}: {detail}"
        print(line)
        _RESULTS.append((self.label, ok, detail))
        assert ok, line


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    return Criterion(marker.args[0] if marker else request.node.name)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" or not report.failed:
        return
    label = marker.args[0]
    if not any(r[0] == label for r in _RESULTS):
        _RESULTS.append((label, False, f"error: {call.excinfo.typename}: {call.excinfo.value}"))
