import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netheat import KernelParams, build_network


@pytest.fixture(scope="session")
def interval():
    return build_network([("a", "b", 1.0)])


@pytest.fixture(scope="session")
def star():
    return build_network([("c", "a", 1.0), ("c", "b", 1.0), ("c", "d", 1.0)])


@pytest.fixture(scope="session")
def weighted_star():
    return build_network([("c", "a", 1.0), ("c", "b", 3.0), ("c", "d", 0.5)])


@pytest.fixture(scope="session")
def multigraph():
    # 4 edges, one parallel pair, one cycle
    return build_network([("a", "b", 1.0), ("a", "b", 2.0),
                          ("b", "c", 1.5), ("a", "c", 1.0)])


@pytest.fixture(scope="session")
def params():
    return KernelParams(tol=1e-10)


def random_network(rng, max_vertices=5, max_edges=6):
    from netheat.verification import random_weighted_network

    return random_weighted_network(rng, max_vertices, max_edges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240518)
