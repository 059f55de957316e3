"""Per-criterion pass/fail reporting for the acceptance suite."""

import re

_CRITERION_RESULTS = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    match = _PATTERN.search(report.nodeid)
    if match is None:
        return
    number, label = int(match.group(1)), match.group(2)
    if report.when == "call":
        _CRITERION_RESULTS[number] = (label, report.outcome)
    elif report.when == "setup" and report.outcome != "passed":
        _CRITERION_RESULTS[number] = (label, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for number in sorted(_CRITERION_RESULTS):
        label, outcome = _CRITERION_RESULTS[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(
            f"  criterion {number:2d} ({label.replace('_', ' ')}): {status}")
