import pytest

from afdplan import ScenarioConfig, preset
from afdplan.budget import stage_budget


@pytest.fixture
def dsv3():
    return preset("deepseek-v3")


@pytest.fixture
def h800():
    return preset("h800")


@pytest.fixture
def gb200():
    return preset("gb200")


@pytest.fixture
def scenario50():
    """The headline serving point: 50 ms target, defaults everywhere else."""
    return ScenarioConfig(slo_tpot=0.050)


@pytest.fixture
def budget50(scenario50, dsv3):
    return stage_budget(scenario50, dsv3)
