import numpy as np
import pytest

from scalemix import RegressionData

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    failed = report.failed
    if report.when == "call" or (failed and number not in _criteria):
        detail = dict(item.user_properties).get("detail", "")
        _criteria[number] = (title, "FAIL" if failed else "PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict, detail = _criteria[number]
        line = f"{verdict} criterion {number}: {title}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_data(n, p, d, a=None, seed=0, intercept=True):
    """Random regression data with heavy-ish errors; X has an intercept column."""
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, p))
    if intercept:
        X[:, 0] = 1.0
    beta = g.standard_normal((p, d))
    y = X @ beta + g.standard_t(4, size=(n, d))
    return RegressionData(y, X, (d + 1) / 2 if a is None else a)


@pytest.fixture
def small_data():
    return make_data(12, 2, 2, seed=3)
