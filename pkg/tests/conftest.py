import pytest

from powerge.equilibrium import solve_steady
from powerge.params import baseline_params


@pytest.fixture(scope="session")
def base():
    return baseline_params()


@pytest.fixture(scope="session")
def base_ss(base):
    return solve_steady(base)
