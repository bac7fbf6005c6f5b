"""Shared fixtures for the carbon-gmam test suite."""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path (as main.py does)
PROJECT_ROOT = Path(__file__).parent.parent.absolute()
sys.path.insert(0, str(PROJECT_ROOT))

from carbonate import BistableOscillator, CarbonateSystem, DoubleWellSystem, LinearSystem, load_params

PARAMS_FILE = PROJECT_ROOT / "params" / "rothman-modern-ocean.json"


def pytest_collection_modifyitems(config, items):
    if PARAMS_FILE.exists():
        return
    skip = pytest.mark.skip(reason=f"parameter file {PARAMS_FILE.name} not present")
    for item in items:
        if "params" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def params():
    if not PARAMS_FILE.exists():
        pytest.skip(f"parameter file {PARAMS_FILE.name} not present")
    return load_params(PARAMS_FILE)


@pytest.fixture(scope="session")
def bistable_params(params):
    """Shipped parameters at c_x = 62, inside the bistable window."""
    return params.with_updates(c_x=62.0, nu=0.0)


@pytest.fixture
def carbonate(bistable_params):
    return CarbonateSystem(bistable_params)


@pytest.fixture
def synthetic_params():
    """Hand-picked parameter set used for pure model-function tests."""
    from carbonate import ModelParams
    return ModelParams(
        mu=250.0, b=4.0, theta=5.0, nu=0.1, c_p=110.0, c_x=60.0,
        c_f=43.0, f0=0.694, w0=2000.0, gamma=4.0, beta=1.7,
    )


@pytest.fixture
def double_well():
    return DoubleWellSystem()


@pytest.fixture
def linear():
    return LinearSystem()


@pytest.fixture
def oscillator():
    return BistableOscillator()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
