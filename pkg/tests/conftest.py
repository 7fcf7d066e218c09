# tests/conftest.py
import numpy as np
import pytest

from rgd_app import config_manager
from rgd_app.datagen import NoiseSpec, gen_regression
from rgd_app.logger_config import setup_logging


@pytest.fixture(autouse=True)
def quiet_logging():
    setup_logging({'logging': {'log_level': 'NONE'}})
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20180101)


@pytest.fixture
def app_config():
    config = config_manager.load_config()
    config['logging'] = {'log_level': 'NONE'}
    return config


@pytest.fixture
def regression_problem(rng):
    """Problema de regresión pequeño con ruido normal (n=200, d=10)."""
    return gen_regression(200, 10, NoiseSpec.explicit('normal', loc=0.0, scale=1.0), rng)


@pytest.fixture
def write_ini(tmp_path):
    def _write(text, name='experiment.ini'):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return path
    return _write
