import numpy as np
import pytest

from nlbeltrami import ExactMapId, MapKind


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def f_t():
    return ExactMapId(MapKind.f_t, t=0.1)


@pytest.fixture
def g_t():
    return ExactMapId(MapKind.g_t, t=0.1)
