import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polyepi.catalog import (  # noqa: E402
    gen_grid, gen_ordinary, gen_projective_plane, gen_symplectic_quadrangle, gen_thin,
)


@pytest.fixture(scope="session")
def fano():
    return gen_projective_plane(2)


@pytest.fixture(scope="session")
def w2():
    return gen_symplectic_quadrangle(2)


@pytest.fixture(scope="session")
def triangle():
    return gen_ordinary(3)


@pytest.fixture(scope="session")
def quadrangle():
    return gen_ordinary(4)


@pytest.fixture(scope="session")
def octagon():
    return gen_ordinary(8)


@pytest.fixture(scope="session")
def grid2():
    return gen_grid(2)


@pytest.fixture(scope="session")
def thin82():
    return gen_thin(8, 2)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, seconds): acceptance criterion and its runtime limit")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, limit = marker.args
    if rep.when == "setup":
        if not rep.passed:
            item.config._criteria[number] = f"criterion {number}: FAIL (setup error)"
        return
    if rep.passed and rep.duration >= limit:
        rep.outcome = "failed"
        rep.longrepr = f"criterion {number} took {rep.duration:.1f}s, limit {limit}s"
    verdict = "PASS" if rep.passed else "FAIL"
    item.config._criteria[number] = (
        f"criterion {number}: {verdict} ({rep.duration:.2f}s, limit {limit}s)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if config._criteria:
        terminalreporter.section("acceptance criteria")
        for number in sorted(config._criteria):
            terminalreporter.write_line(config._criteria[number])
