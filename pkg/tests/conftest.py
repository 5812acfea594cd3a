import numpy as np
import pytest

from flexsat import Gains, PhysicalParams, SatelliteSystem, build_basis

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return PhysicalParams.default()


@pytest.fixture(scope="session")
def gains():
    return Gains.default()


@pytest.fixture(scope="session")
def basis(params):
    return build_basis(params, 4, 1001)


@pytest.fixture(scope="session")
def system(params, gains, basis):
    return SatelliteSystem(params, gains, basis)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit_quaternion(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
