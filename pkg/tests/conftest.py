"""Collects the acceptance-criterion outcomes and prints one line per criterion."""

_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("detail", "")
        name = report.nodeid.split("::")[-1]
        _RESULTS[name] = (report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, (outcome, detail) in sorted(_RESULTS.items(), key=lambda kv: _order(kv[0])):
        tag = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"{tag}  {name.replace('test_', '', 1)}  {detail}")


def _order(name):
    digits = "".join(c for c in name.split("_")[1] if c.isdigit())
    return int(digits or 0)
