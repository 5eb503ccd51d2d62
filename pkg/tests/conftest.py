from collections import OrderedDict

import pytest

_outcomes: "OrderedDict[tuple[int, str], bool]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, name): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes[key] = _outcomes.get(key, True) and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(_outcomes.items()):
        terminalreporter.write_line(f"criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}")
