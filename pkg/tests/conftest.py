from collections import OrderedDict

import pytest

_criteria: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": 0, "failed": []})
    if rep.passed:
        entry["passed"] += 1
    else:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "FAIL" if e["failed"] else "PASS"
        line = f"criterion {number:>2} {status}  {e['title']}  ({e['passed']} passed, {len(e['failed'])} failed)"
        terminalreporter.write_line(line)
        for name in e["failed"]:
            terminalreporter.write_line(f"              failed: {name}")
