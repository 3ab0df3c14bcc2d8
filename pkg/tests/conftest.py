import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        detail = ""
        if report.failed:
            detail = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message
                         or report.longrepr).splitlines()[0]
        _results[number] = (title, report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, outcome, detail = _results[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {number}: {status}  {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
