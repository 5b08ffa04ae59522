import numpy as np
import pytest

from cliffharm.multivector import Multivector


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_mv(rng, n, integer=False):
    if integer:
        return Multivector(n, np.array([int(v) for v in rng.integers(-5, 6, 1 << n)], dtype=object))
    return Multivector(n, rng.standard_normal(1 << n))


# acceptance reporting: one PASS/FAIL line per numbered criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    ok = _CRITERIA.get(num, (title, True))[1]
    if rep.failed or (rep.when == "call" and rep.skipped):
        ok = False
    _CRITERIA[num] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok = _CRITERIA[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {title}")
