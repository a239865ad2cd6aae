import importlib.resources

import numpy as np
import pytest

from tomomle.measurement import read_record


def data_path(name):
    return str(importlib.resources.files("tomomle") / "data" / name)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def example1():
    return read_record(data_path("example1.rec"))


@pytest.fixture
def example2():
    return read_record(data_path("example2.rec"))


@pytest.fixture
def example3():
    return read_record(data_path("example3.rec"))
