import pytest

from shiftfront.config import RunConfig
from shiftfront.model import ClimateProfile, ExpansionRate, ModelParams


@pytest.fixture(scope="session")
def params():
    """d = a = b = 1, unfavourable level -1, transition width 1."""
    return ModelParams(d=1.0, a=1.0, a0=-1.0, b=1.0, l0=1.0, c=0.18, h0=2.0)


@pytest.fixture(scope="session")
def climate(params):
    return ClimateProfile(params)


@pytest.fixture(scope="session")
def mu(params):
    """Affine, from 0.5 at a0 to 1 at a."""
    return ExpansionRate.affine_from_endpoints(0.5, 1.0, params)


@pytest.fixture(scope="session")
def config():
    return RunConfig(d=1.0, a=1.0, a0=-1.0, b=1.0, c=0.18, h0=2.0)


@pytest.fixture(scope="session")
def critical(params, mu):
    from shiftfront.semiwave import critical_speed

    return critical_speed(params, mu)
