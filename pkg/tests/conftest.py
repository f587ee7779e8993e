import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def au():
    from casimir_neq import gold
    return gold()


@pytest.fixture(scope="session")
def si():
    from casimir_neq import silicon
    return silicon()
