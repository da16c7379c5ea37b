from itertools import combinations, product
from pathlib import Path

import numpy as np
import pytest

from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.sim import sample_dag


ROOT = Path(__file__).parents[1].resolve()


def enumerate_dags(p):
    """Every labelled DAG on p nodes (25 at p=3, 543 at p=4)"""
    pairs = list(combinations(range(p), 2))
    dags = []
    for states in product((0, 1, 2), repeat=len(pairs)):
        m = np.zeros((p, p), dtype=np.uint8)
        for (a, b), state in zip(pairs, states):
            if state == 1:
                m[b, a] = 1  # a -> b
            elif state == 2:
                m[a, b] = 1  # b -> a
        g = PdagMatrix(m)
        if not g.has_directed_cycle():
            dags.append(g)
    return dags


def random_dag(p, rng):
    """A random DAG whose causal order is shuffled"""
    return sample_dag(p, rng).permuted(rng.permutation(p))


@pytest.fixture
def m1():
    # X1 -> X2 <- X3, X5 -> X3, X1 -> X4, X1 -> X5, X4 -> X5
    return PdagMatrix([
        [0, 0, 0, 0, 0],
        [1, 0, 1, 0, 0],
        [0, 0, 0, 0, 1],
        [1, 0, 0, 0, 0],
        [1, 0, 0, 1, 0],
    ])


@pytest.fixture
def m2():
    # X1 -> X2 <- X3, X1 -- X4, X1 -- X5, X4 -- X5, X3 -- X5
    return PdagMatrix([
        [0, 0, 0, 1, 1],
        [1, 0, 1, 0, 0],
        [0, 0, 0, 0, 1],
        [1, 0, 0, 0, 1],
        [1, 0, 1, 1, 0],
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
