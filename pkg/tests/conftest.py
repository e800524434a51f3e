"""Shared fixtures for the spindyn test suite."""

import logging

import numpy as np
import pytest

from spindyn.core.models import ModelParams, SpinMagnitude
from spindyn.utils.error_handler import initialize_error_handler


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance checks (s1 = 200, s = 15 classification)")


@pytest.fixture
def half() -> SpinMagnitude:
    return SpinMagnitude.from_value("1/2")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240117)


@pytest.fixture
def semiclassical_params() -> ModelParams:
    s = SpinMagnitude.from_value(15)
    return ModelParams(s1=s, s2=s, alpha=2.0 / 15.0)


@pytest.fixture(autouse=True)
def fresh_error_handler():
    initialize_error_handler(logging.getLogger("spindyn.tests"))
    yield


@pytest.fixture
def random_ket(rng):
    """Factory of normalized random amplitude vectors."""
    def make(dim: int) -> np.ndarray:
        amplitudes = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return amplitudes / np.linalg.norm(amplitudes)
    return make
