import re

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\w+)$")
_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    m = _ACCEPTANCE.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            verdict = "FAIL (expected, see notes)"
        else:
            verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _results[m.group(1)] = verdict


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results):
        num, _, name = key.partition("_")
        terminalreporter.write_line(f"criterion {num:<4} {_results[key]:<27} {name.replace('_', ' ')}")
