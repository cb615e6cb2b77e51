import numpy as np
import pytest

from models import WeightKind
from modules.coeffspace import SpaceModel, make_space


@pytest.fixture
def hardy() -> SpaceModel:
    return make_space(WeightKind.HARDY, N=256)


@pytest.fixture
def small_hardy() -> SpaceModel:
    return make_space(WeightKind.HARDY, N=64)


@pytest.fixture(params=[WeightKind.HARDY, WeightKind.BERGMAN, WeightKind.DIRICHLET])
def preset(request: pytest.FixtureRequest) -> SpaceModel:
    return make_space(request.param, N=128)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)
