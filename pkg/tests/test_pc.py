import numpy as np
import pytest

from conftest import random_dag
from cpdag_discovery_tool.config import ALPHAS
from cpdag_discovery_tool.errors import SingularMatrixError, ValidationError
from cpdag_discovery_tool.graph import dag_to_cpdag, skeleton
from cpdag_discovery_tool.metrics import adjacency_confusion, f1
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.models.sem import SemModel
from cpdag_discovery_tool.pc import (
    FisherZTest,
    OracleTest,
    SepsetTable,
    fisher_z_independent,
    partial_correlation,
    pc,
    pc_skeleton,
)
from cpdag_discovery_tool.sim import (
    analytic_correlation,
    correlation_matrix,
    sample_dag,
    sample_sem,
    simulate_data,
)


def chain_sem():
    dag = PdagMatrix.from_edges(3, directed=[(0, 1), (1, 2)])
    beta = np.zeros((3, 3))
    beta[0, 1], beta[1, 2] = 0.8, -1.2
    return SemModel(dag, beta, [1.0, 0.5, 1.5])


def test_identity_is_independent():
    c = np.eye(4)
    assert fisher_z_independent(c, 100, 0, 3, (), 0.05)
    assert fisher_z_independent(c, 100, 1, 2, (0, 3), 0.8)


def test_strong_correlation_is_dependent():
    c = np.array([[1.0, 0.9], [0.9, 1.0]])
    # sqrt(97) * atanh(0.9) is about 14.5, far above 1.96
    assert not fisher_z_independent(c, 100, 0, 1, (), 0.05)


def test_chain_is_independent_given_its_middle():
    c = analytic_correlation(chain_sem())
    assert partial_correlation(c, 0, 2, (1,)) == pytest.approx(0.0, abs=1e-12)
    assert fisher_z_independent(c, 1_000_000, 0, 2, (1,), 0.05)
    assert not fisher_z_independent(c, 1_000_000, 0, 2, (), 0.05)


def test_fisher_z_symmetry_and_set_order(rng):
    sem = sample_sem(sample_dag(5, rng), rng)
    c = correlation_matrix(simulate_data(sem, 200, rng))
    assert partial_correlation(c, 0, 4, (1, 2, 3)) == pytest.approx(
        partial_correlation(c, 4, 0, (3, 1, 2)), abs=1e-12)
    for alpha in ALPHAS:
        assert fisher_z_independent(c, 200, 0, 4, (1, 2), alpha) == \
            fisher_z_independent(c, 200, 4, 0, (2, 1), alpha)


def test_independence_is_monotone_in_alpha(rng):
    for _ in range(20):
        sem = sample_sem(sample_dag(4, rng), rng)
        c = correlation_matrix(simulate_data(sem, 60, rng))
        decisions = [fisher_z_independent(c, 60, 0, 1, (2,), alpha) for alpha in sorted(ALPHAS)]
        # independent at some alpha implies independent at every smaller alpha
        first_dependent = decisions.index(False) if False in decisions else len(decisions)
        assert all(decisions[:first_dependent])
        assert not any(decisions[first_dependent:])


def test_fisher_z_preconditions():
    with pytest.raises(ValidationError):
        fisher_z_independent(np.eye(3), 3, 0, 1, (), 0.05)
    with pytest.raises(ValidationError):
        fisher_z_independent(np.eye(3), 100, 0, 1, (), 1.0)


def test_singular_conditioning_set_is_named():
    c = np.full((4, 4), 0.5)
    c[2, 3] = c[3, 2] = 1.0
    np.fill_diagonal(c, 1.0)
    with pytest.raises(SingularMatrixError, match="X3, X4"):
        partial_correlation(c, 0, 1, (2, 3))


def test_sepset_table_keys_are_unordered():
    table = SepsetTable()
    table.record(3, 1, (4, 0))
    assert (1, 3) in table and (3, 1) in table
    assert table.get(1, 3) == (0, 4)
    assert list(table.items()) == [((1, 3), (0, 4))]


def test_oracle_pc_on_worked_example(m1, m2):
    result = pc(OracleTest(m1), 5)
    assert result.graph == m2
    assert result.collider_conflicts == 0
    assert result.is_proper
    assert result.sepsets.get(0, 2) == (4,)


def test_oracle_skeleton_never_keeps_separated_pairs(m1, m2):
    g, sepsets = pc_skeleton(OracleTest(m1), 5)
    assert g == skeleton(m2)
    assert len(sepsets) == 4
    for (i, j), _ in sepsets.items():
        assert not g.adjacency()[i, j]


def test_identity_correlation_gives_empty_graph():
    g, sepsets = pc_skeleton(FisherZTest(np.eye(5), 100, 0.05), 5)
    assert g == PdagMatrix.empty(5)
    assert all(s == () for _, s in sepsets.items())
    assert pc(FisherZTest(np.eye(5), 100, 0.05), 5).graph == PdagMatrix.empty(5)


def test_strong_dependence_keeps_every_edge():
    c = np.full((5, 5), 0.99)
    np.fill_diagonal(c, 1.0)
    g, sepsets = pc_skeleton(FisherZTest(c, 10_000, 0.05), 5)
    assert g == PdagMatrix(1 - np.eye(5, dtype=np.uint8))
    assert len(sepsets) == 0


def test_pc_rejects_size_mismatch():
    with pytest.raises(ValidationError):
        pc(FisherZTest(np.eye(4), 100, 0.05), 5)


def test_oracle_pc_recovers_cpdags(rng):
    for p in (4, 5, 6):
        for _ in range(20):
            dag = random_dag(p, rng)
            assert pc(OracleTest(dag), p).graph == dag_to_cpdag(dag)


@pytest.mark.slow
def test_oracle_pc_recovers_cpdags_extended():
    rng = np.random.default_rng(500)
    for k in range(500):
        p = (4, 5, 6)[k % 3]
        dag = random_dag(p, rng)
        assert pc(OracleTest(dag), p).graph == dag_to_cpdag(dag)


@pytest.mark.slow
def test_pc_adjacency_f1_improves_with_sample_size():
    rng = np.random.default_rng(4)
    scores = {50: [], 50_000: []}
    for _ in range(100):
        dag = random_dag(5, rng)
        sem = sample_sem(dag, rng)
        truth = dag_to_cpdag(dag)
        for n in scores:
            c = correlation_matrix(simulate_data(sem, n, rng))
            est = pc(FisherZTest(c, n, 0.05), 5).graph
            scores[n].append(f1(adjacency_confusion(est, truth)))
    assert np.mean(scores[50_000]) - np.mean(scores[50]) > 0.05
