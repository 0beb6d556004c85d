import pytest
from hypothesis import HealthCheck, settings

from groupsignal import model, solver

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def s1():
    return model.scenario_s1()


@pytest.fixture(scope="session")
def s1_eq(s1):
    return solver.solve_equilibrium(s1).stable_interior[0]
