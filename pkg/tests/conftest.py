from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from srlengine.config import default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()
