import numpy as np
import pytest

from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def gray_images(min_side=1, max_side=12):
    shapes = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shapes.flatmap(lambda s: arrays(np.uint8, s))


def binary_images(min_side=1, max_side=12):
    shapes = st.tuples(st.integers(min_side, max_side), st.integers(min_side, max_side))
    return shapes.flatmap(lambda s: arrays(np.bool_, s))


# -- acceptance criterion reporting ----------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = (marker.args[0], marker.args[1])
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _ACCEPTANCE.get(key, True)
        _ACCEPTANCE[key] = prev and rep.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}")
