"""Simulated training and test data

Random DAGs with a uniform spread of edge counts, linear Gaussian SEMs on
them, correlation-matrix features and permuted CPDAG labels.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import networkx as nx
import numpy as np
from joblib import Parallel, delayed
from tqdm.auto import tqdm

from cpdag_discovery_tool.DAOs.corpus_dao import CorpusDAO
from cpdag_discovery_tool.config import BETA_BOUNDS, MAX_SPARSITY, POSITIVE_SIGN, SIGMA_BOUNDS
from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.graph import dag_to_cpdag
from cpdag_discovery_tool.models.pdag import PdagMatrix
from cpdag_discovery_tool.models.sem import SemModel, TrainingPair
from cpdag_discovery_tool.utils.seeding import item_rng

logger = logging.getLogger(__name__)


def sample_dag(p: int, rng: np.random.Generator) -> PdagMatrix:
    """Draw a random DAG in causal order X1..Xp

    Starts from the complete lower-triangular DAG, draws a sparsity
    s ~ Unif[0, 0.8] and removes round(s * p(p-1)/2) of its edges, chosen
    uniformly (round half to even). The edge count is thereby spread
    uniformly between 20% and 100% of the complete graph.

    Args:
        p (int): Number of nodes, at least 2
        rng (np.random.Generator): Source of randomness

    Returns:
        PdagMatrix: The DAG
    """
    if p < 2:
        raise ValidationError(f"sample_dag needs p >= 2, got {p}")
    rows, cols = np.tril_indices(p, k=-1)
    sparsity = rng.uniform(0.0, MAX_SPARSITY)
    n_removed = int(round(sparsity * rows.size))
    removed = rng.choice(rows.size, size=n_removed, replace=False)
    m = np.zeros((p, p), dtype=np.uint8)
    m[rows, cols] = 1
    m[rows[removed], cols[removed]] = 0
    return PdagMatrix(m)


def sample_sem(dag: PdagMatrix, rng: np.random.Generator) -> SemModel:
    """Draw SEM parameters for a DAG

    sigma_i ~ Unif[0.5, 2]; every edge weight is b_val * b_sign with
    b_val ~ Unif[0.1, 2] and b_sign = +1 with probability 0.6, else -1.
    Edges are visited row-major over (parent, child).
    """
    dag.require_dag("sample_sem input")
    sigma = rng.uniform(*SIGMA_BOUNDS, size=dag.p)
    edges = np.argwhere(dag.directed())
    values = rng.uniform(*BETA_BOUNDS, size=len(edges))
    signs = np.where(rng.random(len(edges)) < POSITIVE_SIGN, 1.0, -1.0)
    beta = np.zeros((dag.p, dag.p))
    beta[edges[:, 0], edges[:, 1]] = values * signs
    return SemModel(dag, beta, sigma)


def simulate_data(sem: SemModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample n observations from the SEM, one variable at a time in causal order

    Returns:
        np.ndarray: An n x p data matrix
    """
    if n < 2:
        raise ValidationError(f"simulate_data needs n >= 2, got {n}")
    noise = rng.standard_normal((n, sem.p)) * sem.sigma
    data = np.zeros((n, sem.p))
    for i in nx.lexicographical_topological_sort(sem.dag.to_networkx()):
        data[:, i] = data @ sem.beta[:, i] + noise[:, i]
    return data


def correlation_matrix(data) -> np.ndarray:
    """Pearson correlation matrix of the columns of an n x p data matrix"""
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValidationError(f"data must be an n x p matrix, got shape {data.shape}")
    if data.shape[0] < 2:
        raise ValidationError(f"need at least two rows to correlate, got {data.shape[0]}")
    constant = np.flatnonzero(np.ptp(data, axis=0) == 0)
    if constant.size:
        raise ValidationError(f"column X{constant[0] + 1} has zero sample variance")
    c = np.atleast_2d(np.corrcoef(data, rowvar=False))
    c = np.clip(c, -1.0, 1.0)
    np.fill_diagonal(c, 1.0)
    return c


def analytic_correlation(sem: SemModel) -> np.ndarray:
    """Population correlation matrix of the SEM

    The covariance is (I - B)^-T diag(sigma^2) (I - B)^-1 with B the weight
    matrix, rescaled to unit diagonal.
    """
    inverse = np.linalg.inv(np.eye(sem.p) - sem.beta)
    covariance = inverse.T @ np.diag(sem.sigma ** 2) @ inverse
    scale = np.sqrt(np.diag(covariance))
    c = covariance / np.outer(scale, scale)
    np.fill_diagonal(c, 1.0)
    return c


def permute_pair(c, label: PdagMatrix, permutation: Sequence[int]) -> TrainingPair:
    """Apply one node permutation to both feature and label

    New node `a` is old node `permutation[a]`, i.e. P^T C P for the
    permutation matrix P with P[permutation[a], a] = 1.
    """
    c = np.asarray(c, dtype=float)
    perm = np.asarray(permutation, dtype=np.int64)
    if c.shape != (label.p, label.p) or perm.shape != (label.p,):
        raise ValidationError(
            f"size mismatch: feature {c.shape}, label over {label.p} nodes, "
            f"permutation of length {perm.size}")
    return TrainingPair(c[np.ix_(perm, perm)], label.permuted(perm), perm)


def make_pair(p: int, n: int, rng: np.random.Generator) -> TrainingPair:
    """Simulate one (feature, label) pair with a fresh uniform permutation"""
    dag = sample_dag(p, rng)
    sem = sample_sem(dag, rng)
    data = simulate_data(sem, n, rng)
    feature = correlation_matrix(data)
    label = dag_to_cpdag(dag)
    return permute_pair(feature, label, rng.permutation(p))


def _make_pairs(p: int, n: int, seed: int, items: range) -> List[TrainingPair]:
    return [make_pair(p, n, item_rng(seed, k)) for k in items]


def generate_pairs(p: int, n: int, count: int, seed: int, workers: int = 1,
                   progress: bool = False) -> List[TrainingPair]:
    """Simulate `count` pairs; item k uses only its own sub-seed (seed, k)

    The output is the same for any worker count.
    """
    if count < 1:
        raise ValidationError(f"corpus count must be >= 1, got {count}")
    chunk = max(1, min(1000, -(-count // (4 * workers))))
    chunks = [range(start, min(start + chunk, count)) for start in range(0, count, chunk)]
    jobs = Parallel(n_jobs=workers, return_as="generator")(
        delayed(_make_pairs)(p, n, seed, items) for items in chunks)
    pairs = []
    for part in tqdm(jobs, total=len(chunks), desc="simulate", unit="chunk", disable=not progress):
        pairs.extend(part)
    return pairs


def generate_corpus(p: int, n: int, count: int, seed: int,
                    location: Union[str, Path], workers: int = 1,
                    shard_size: Optional[int] = None, progress: bool = False) -> CorpusDAO:
    """Simulate a corpus and write its shards and manifest to `location`

    Returns:
        CorpusDAO: Access to the written corpus
    """
    pairs = generate_pairs(p, n, count, seed, workers=workers, progress=progress)
    corpus = CorpusDAO(location)
    corpus.add(pairs, n=n, seed=seed, shard_size=shard_size)
    logger.info("wrote %d pairs (p=%d, n=%d, seed=%d) to %s", count, p, n, seed, location)
    return corpus
