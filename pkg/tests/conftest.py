import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from colprob.geometry import Polygon2D  # noqa: E402


@pytest.fixture
def unit_square():
    return Polygon2D.from_vertices([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])


@pytest.fixture
def car():
    return Polygon2D.rectangle(4.6, 1.9)
