import numpy as np
import pytest
from hypothesis import settings

from triconsensus.network import SignedNetwork, example_network

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ex1():
    return example_network(1)


@pytest.fixture(scope="session")
def ex2():
    return example_network(2)


def triangle(inter=-1.0) -> SignedNetwork:
    """Three singleton clusters joined pairwise with weight ``inter``."""
    W = inter * (np.ones((3, 3)) - np.eye(3))
    return SignedNetwork(W, ((0,), (1,), (2,)))


def from_edges(n, clusters, edges) -> SignedNetwork:
    """Network from 1-based (i, j, w) triples and 1-based clusters."""
    W = np.zeros((n, n))
    for i, j, w in edges:
        W[i - 1, j - 1] = W[j - 1, i - 1] = w
    return SignedNetwork(W, tuple(tuple(k - 1 for k in c) for c in clusters))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
