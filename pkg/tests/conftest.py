import json

import numpy as np
import pytest

from src.certify import fixtures
from src.config.settings import settings
from src.geometry.flags import FlagType


@pytest.fixture
def sl2z():
    """SL(2,Z) = Z/4 *_{Z/2} Z/6."""
    return fixtures.sl2z_amalgam()


@pytest.fixture
def bs12():
    """BS(1,2) = <a, f | f a f^-1 = a^2>."""
    return fixtures.bs12_hnn()


@pytest.fixture
def full3():
    return FlagType.full(3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def scene_file(tmp_path):
    """
    Writes a scene document and returns its path.
    Usage: scene_file({"seed": 0, "fixture": "schottky"})
    """
    def _write(doc, name="scene.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def mock_settings(monkeypatch, tmp_path):
    """
    Isolate output paths and keep the certifier cheap.
    """
    monkeypatch.setattr(settings, "OUTPUT_DIR", tmp_path / "output")
    return settings
