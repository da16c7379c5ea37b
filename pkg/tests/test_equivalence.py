from itertools import combinations

import numpy as np
import pytest

from conftest import enumerate_dags, random_dag
from cpdag_discovery_tool.graph import (
    consistent_extension,
    d_separated,
    dag_to_cpdag,
    markov_equivalent,
    skeleton,
    v_structures,
)


def independence_model(dag):
    """Every d-separation statement of the DAG, as a hashable tuple"""
    others = range(dag.p)
    statements = []
    for i, j in combinations(others, 2):
        rest = [k for k in others if k not in (i, j)]
        for size in range(len(rest) + 1):
            for s in combinations(rest, size):
                statements.append(d_separated(dag, i, j, s))
    return tuple(statements)


def assert_same_partitions(dags):
    """CPDAG equality, shared skeleton + v-structures and equal d-separations agree on every pair"""
    cpdags = [dag_to_cpdag(dag).m.tobytes() for dag in dags]
    patterns = [(skeleton(dag).m.tobytes(), tuple(v_structures(dag))) for dag in dags]
    oracles = [independence_model(dag) for dag in dags]
    # three keys induce the same partition iff each key alone has as many
    # classes as the three of them jointly
    joint = len(set(zip(cpdags, patterns, oracles)))
    assert len(set(cpdags)) == joint
    assert len(set(patterns)) == joint
    assert len(set(oracles)) == joint
    return joint


def test_equivalence_classes_p3():
    dags = enumerate_dags(3)
    assert len(dags) == 25
    assert assert_same_partitions(dags) == 11


def test_equivalence_classes_p4():
    dags = enumerate_dags(4)
    assert len(dags) == 543
    assert assert_same_partitions(dags) == 185


def test_markov_equivalent_agrees_with_cpdags():
    dags = enumerate_dags(3)
    for d1 in dags:
        for d2 in dags:
            assert markov_equivalent(d1, d2) == (dag_to_cpdag(d1) == dag_to_cpdag(d2))


def equivalent_member(dag, rng):
    """Another DAG of the same class: extend the CPDAG under a shuffled labelling"""
    perm = rng.permutation(dag.p)
    member = consistent_extension(dag_to_cpdag(dag.permuted(perm)))
    return member.permuted(np.argsort(perm))


@pytest.mark.slow
def test_equivalence_classes_random_p6():
    rng = np.random.default_rng(6)
    dags = [random_dag(6, rng) for _ in range(1000)]
    # random DAGs rarely share a class, so add a second member for some
    dags += [equivalent_member(dag, rng) for dag in dags[:200]]
    assert_same_partitions(dags)
