import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from senselink.model import synthesize_model


@pytest.fixture(scope="session")
def default_model():
    return synthesize_model()
