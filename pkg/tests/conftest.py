import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ifspovm import fixtures  # noqa: E402


@pytest.fixture
def cantor():
    return fixtures.cantor()


@pytest.fixture
def dyadic():
    return fixtures.dyadic()


@pytest.fixture
def overlap():
    return fixtures.overlap()
