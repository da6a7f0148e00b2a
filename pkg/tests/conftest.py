"""Shared fixtures: one small cache built per session, one large reusable one.

The large cache (t_max 1.3e5) takes a while to build, so it is persisted
under tests/.devcache/ and reloaded on later runs; point
ZETA_LADDER_TEST_CACHE at an existing file to reuse one from elsewhere.
"""

import os
import pathlib

import pytest

from zeta_ladder import build_cache, load_cache, save_cache

BIG_T_MAX = 1.3e5
BIG_STEP = 0.25
BIG_TOL = 1e-9

ACCEPTANCE_LINES = []


def _big_cache_file():
    env = os.environ.get("ZETA_LADDER_TEST_CACHE")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), ".devcache",
                        "cumulative_130000.txt")


@pytest.fixture(scope="session")
def repo_root():
    return pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def small_cache():
    return build_cache(700.0, step=0.25, tol=1e-9)


@pytest.fixture(scope="session")
def small_cache_path(small_cache, tmp_path_factory):
    path = tmp_path_factory.mktemp("cache") / "small_700.txt"
    save_cache(small_cache, str(path))
    return str(path)


@pytest.fixture(scope="session")
def big_cache_path():
    path = _big_cache_file()
    if not os.path.exists(path):
        os.makedirs(os.path.dirname(path), exist_ok=True)
        save_cache(build_cache(BIG_T_MAX, step=BIG_STEP, tol=BIG_TOL), path)
    return path


@pytest.fixture(scope="session")
def big_cache(big_cache_path):
    return load_cache(big_cache_path)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
