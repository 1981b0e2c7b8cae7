import json
import os

# логи тестов только в консоль
os.environ['CXBOX_LOG_FILE'] = ''

import numpy as np
import pytest

from cxbox.services.directions import three_direction_mesh, validate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def identity2():
    return validate(np.eye(2))


@pytest.fixture
def diag23():
    return validate(np.diag([2.0, 3.0]))


@pytest.fixture
def shear():
    return validate([[1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def mesh3():
    return three_direction_mesh()


@pytest.fixture
def write_spec(tmp_path):
    """Записать описание задачи в JSON и вернуть путь"""
    def _write(data, name='spec.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return _write
