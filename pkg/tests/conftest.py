import pytest

from metasir.bipolar_model import BipolarParams
from metasir.cellular_model import CellularParams


@pytest.fixture
def fig2a():
    return BipolarParams(lam=1.0, R=0.5, p=0.25, alpha=4.0)


@pytest.fixture
def fig2b():
    return BipolarParams(lam=5.0, R=0.5, p=0.05, alpha=4.0)


@pytest.fixture
def cell4():
    return CellularParams(alpha=4.0)
