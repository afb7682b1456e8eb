import numpy as np
import pytest

import segmentkit.persistent_storage as persistent_storage
from segmentkit.settings import settings


@pytest.fixture(autouse=True)
def storage_dir(tmp_path, monkeypatch):
    """ Every test gets its own settings file and output directory. """
    monkeypatch.setattr(persistent_storage, 'PERSISTENT_STORAGE_DIR', str(tmp_path / "storage"))
    settings.reload()
    yield tmp_path / "storage"
    settings.reload()


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
