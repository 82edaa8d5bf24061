import numpy as np
import pytest

from edgecert import Graph, canonical_edge_set, make_graph


def random_graph(rng: np.random.Generator, n: int, density: float = 0.4, **kwargs) -> Graph:
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    mask = rng.random(len(pairs)) < density
    edges = [e for e, keep in zip(pairs, mask) if keep]
    return make_graph(n, edges, **kwargs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
