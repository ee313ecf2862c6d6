import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from acm3 import models as M

settings.register_profile(
    "acm3",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("acm3")

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE]


@pytest.fixture(scope="session")
def flat1():
    return M.make_flat(1)


@pytest.fixture(scope="session")
def flat2():
    return M.make_flat(2)


@pytest.fixture(scope="session")
def sphere1():
    return M.make_sphere(1)


@pytest.fixture(scope="session")
def sphere2():
    return M.make_sphere(2)


@pytest.fixture(scope="session")
def scrambled1(flat1):
    return M.scramble(flat1, 42)


@pytest.fixture(scope="session")
def flat_points(flat1):
    return flat1.sample(8, 7)


@pytest.fixture(scope="session")
def sphere_points(sphere1):
    return sphere1.sample(8, 7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
