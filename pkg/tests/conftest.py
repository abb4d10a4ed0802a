"""Shared fixtures: small charts reused across the suite."""

import numpy as np
import pytest

from lcslab.charts import Chart


@pytest.fixture(scope="session")
def plane():
    return Chart("plane", ("x", "y"))


@pytest.fixture(scope="session")
def r3():
    return Chart("r3", ("x", "y", "z"))


@pytest.fixture(scope="session")
def r4():
    return Chart("r4", ("a", "b", "c", "d"), tuple((-2.0, 2.0) for _ in range(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
