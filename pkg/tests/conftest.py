"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_OUTCOMES = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        details = [v for k, v in report.user_properties if k == "detail"]
        _OUTCOMES[report.nodeid] = (report.outcome, details)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_OUTCOMES, key=lambda n: int(n.split("test_criterion_")[1].split("_")[0])):
        outcome, details = _OUTCOMES[nodeid]
        name = nodeid.split("::")[-1][len("test_criterion_"):]
        number, _, title = name.partition("_")
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"{status}  criterion {int(number):>2}  {title.replace('_', ' ')}"
        if details:
            line += "  [" + "; ".join(details) + "]"
        terminalreporter.write_line(line)
