import numpy as np
import pytest

from dicke2ion.algebra import make_space
from dicke2ion.presets import preset_ion


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow acceptance tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="slow: pass --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture
def space_2q():
    return make_space(2, 4)


@pytest.fixture
def space_3q():
    return make_space(3, 6)


@pytest.fixture
def ion():
    return preset_ion()
