import numpy as np
import pytest

from digh.graph_core import DirectedGraph


def random_strong_digraph(n, rng, density=0.15, weighted=True):
    """Random strongly connected digraph: a Hamiltonian cycle on a random
    permutation plus random extra edges."""
    perm = rng.permutation(n)
    W = np.zeros((n, n))
    W[perm, np.roll(perm, -1)] = 1.0
    extra = rng.random((n, n)) < density
    np.fill_diagonal(extra, False)
    W[extra] = 1.0
    if weighted:
        W *= rng.uniform(0.5, 2.0, size=(n, n))
    return DirectedGraph.from_adjacency(W)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def strong_graphs(rng):
    return [random_strong_digraph(int(rng.integers(5, 25)), rng) for _ in range(8)]
