"""Общие фикстуры: настольные DAG, конфигурация и хеши."""

import pytest

from noisy_dialog.config import Settings
from noisy_dialog.hashing.suite import HashSuite
from noisy_dialog.params import derive_params
from noisy_dialog.protocol.dag import build_random_dag, pad_dag

SMALL_EPS = 0.02
SMALL_DEPTH = 64
SMALL_STATES = 256


@pytest.fixture(scope="session")
def small_config():
    return derive_params(SMALL_EPS, SMALL_DEPTH, states=SMALL_STATES, seed=7)


@pytest.fixture(scope="session")
def suite(small_config):
    return HashSuite(small_config)


@pytest.fixture(scope="session")
def small_dag():
    return build_random_dag(SMALL_DEPTH, SMALL_STATES, rng_seed=7)


@pytest.fixture(scope="session")
def padded_dag(small_dag, small_config):
    return pad_dag(small_dag, small_config.r)


@pytest.fixture
def settings(tmp_path):
    """Settings настольного масштаба; журнал и результаты — во временном каталоге."""
    s = Settings()
    s.logging.file.path = str(tmp_path / "test.log")
    s.run.epsilon = SMALL_EPS
    s.run.depth = SMALL_DEPTH
    s.run.states = SMALL_STATES
    s.run.seed = 11
    s.output.path = str(tmp_path / "results" / "trials")
    return s
