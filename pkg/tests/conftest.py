import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and report.passed:
        return
    n, title = marker.args
    entry = _RESULTS.setdefault(n, {"title": title, "ok": True, "seconds": 0.0})
    entry["ok"] = entry["ok"] and not report.failed
    if report.when == "call":
        entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        e = _RESULTS[n]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {e['title']}  ({e['seconds']:.1f} s)")
