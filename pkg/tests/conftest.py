import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion number n")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, label = mark.args
    table = item.config._criteria
    if rep.when == "setup" and not rep.passed:
        table[n] = (label, "FAIL" if rep.failed else "SKIP", "setup " + rep.outcome)
    elif rep.when == "call":
        detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        table[n] = (label, "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL", detail)


def pytest_terminal_summary(terminalreporter, config):
    table = getattr(config, "_criteria", {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(table):
        label, verdict, detail = table[n]
        line = f"criterion {n:2d} {verdict}  {label}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
