import re

_acceptance = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    number, name = int(match.group(1)), match.group(2).replace("_", " ")
    failed = report.failed
    if report.when == "call" or (failed and number not in _acceptance):
        measured = dict(report.user_properties).get("measured", "")
        _acceptance[number] = (name, "FAIL" if failed else "PASS", measured)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        name, outcome, measured = _acceptance[number]
        line = f"criterion {number:2d} {outcome}  {name}"
        terminalreporter.write_line(line + (f"  [{measured}]" if measured else ""))
