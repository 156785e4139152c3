import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ptmon.benchmark import DEFAULT_INTERVALS, PREDICATE_NAMES
from ptmon.fragment import build_depth1_dictionary


@pytest.fixture(scope="session")
def standard_dictionary():
    """The crossroad dictionary: 7 predicates x 5 windows x {always, once}."""
    return build_depth1_dictionary(7, DEFAULT_INTERVALS, PREDICATE_NAMES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
