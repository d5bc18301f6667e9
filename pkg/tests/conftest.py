import functools

import numpy as np
import pytest

from revend.catalog import catalog
from revend.warp import warp_from_curve


@functools.lru_cache(maxsize=None)
def cached_end(name, params=()):
    return catalog(name, dict(params))


@functools.lru_cache(maxsize=None)
def cached_warp(name, params=()):
    return warp_from_curve(cached_end(name, params).curve)


@pytest.fixture
def end_of():
    return cached_end


@pytest.fixture
def warp_of():
    return cached_warp


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
