import pytest

from helixsim.farm import run_strategy_suite

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when not in ("setup", "call"):
        return
    number, title = marker.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    if call.when == "setup" and not failed:
        return
    previous = _CRITERIA.get(number, (title, True))[1]
    _CRITERIA[number] = (title, previous and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}")


@pytest.fixture(scope="session")
def two_turbine_suite():
    """The nine-case comparison on the default two-turbine row, computed once per session."""
    return run_strategy_suite(two_turbine=True)


@pytest.fixture(scope="session")
def suite_metrics(two_turbine_suite):
    return {r.name: r.metrics for r in two_turbine_suite}
