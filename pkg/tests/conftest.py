# tests/conftest.py
import numpy as np
import pytest

from app.data.reference_systems import bowtie, complete, cycle_graph, path_graph, petersen
from app.models.field import make_field


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def f3():
    return make_field(3)


@pytest.fixture
def f5():
    return make_field(5)


@pytest.fixture
def triangle():
    return complete(3)


@pytest.fixture
def bowtie_graph():
    return bowtie()


@pytest.fixture
def petersen_graph():
    return petersen()


@pytest.fixture
def edge():
    return path_graph(2)


@pytest.fixture
def square():
    return cycle_graph(4)
