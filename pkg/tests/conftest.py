from collections import defaultdict

import pytest

CRITERIA = {
    1: "circle baseline",
    2: "ellipse closed form",
    3: "bound sandwich",
    4: "critical point derivatives",
    5: "rectangle piecewise law",
    6: "corner limit family",
    7: "oracle dominance",
    8: "invariant suite",
    9: "open cases",
}

_outcomes = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[marker.args[0]].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        runs = _outcomes.get(n)
        if not runs:
            status = "NOT RUN"
        else:
            status = "PASS" if all(runs) else "FAIL"
        terminalreporter.write_line(f"criterion {n} ({name}): {status} [{sum(runs or [])}/{len(runs or [])} checks]")
