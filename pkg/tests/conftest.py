import pytest

_CRITERIA: dict[str, list[str]] = {}
_NOTES: dict[str, list[str]] = {}


@pytest.fixture
def note(request):
    """Attach a diagnostic line to the test's criterion in the summary."""
    label = request.node.get_closest_marker("criterion").args[0]
    return lambda text: _NOTES.setdefault(label, []).append(text)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" and not hasattr(report, "wasxfail") else "FAIL"
        _CRITERIA.setdefault(mark.args[0], []).append(status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (int("".join(c for c in s.split()[0] if c.isdigit())), s)):
        status = "PASS" if all(s == "PASS" for s in _CRITERIA[label]) else "FAIL"
        terminalreporter.write_line(f"{status}  {label}")
        for text in _NOTES.get(label, []):
            terminalreporter.write_line(f"        {text}")
