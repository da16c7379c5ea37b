from __future__ import annotations

from typing import Optional

import numpy as np

from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.pdag import PdagMatrix


class SemModel:
    """A linear Gaussian structural equation model over a DAG

    Each variable is `X_i = sum_j X_j * beta[j, i] + eps_i` with
    `eps_i ~ N(0, sigma[i]^2)`, the sum running over the parents j of i.
    """

    def __init__(self, dag: PdagMatrix, beta, sigma) -> None:
        dag.require_dag("SEM graph")
        beta = np.array(beta, dtype=float)
        sigma = np.array(sigma, dtype=float)
        if beta.shape != (dag.p, dag.p) or sigma.shape != (dag.p,):
            raise ValidationError(
                f"SEM over {dag.p} nodes needs beta {(dag.p, dag.p)} and sigma {(dag.p,)}, "
                f"got {beta.shape} and {sigma.shape}")
        if not np.array_equal(beta != 0, dag.directed()):
            raise ValidationError("beta's nonzero pattern must equal the DAG's edges")
        if np.any(sigma <= 0):
            raise ValidationError("noise scales must be positive")
        beta.setflags(write=False)
        sigma.setflags(write=False)
        self.__dag = dag
        self.__beta = beta
        self.__sigma = sigma

    def __repr__(self):
        return f"SemModel(p={self.p}, edges={int((self.__beta != 0).sum())})"

    @property
    def dag(self) -> PdagMatrix:
        return self.__dag

    @property
    def beta(self) -> np.ndarray:
        """`beta[j, i]` is the weight of edge j -> i"""
        return self.__beta

    @property
    def sigma(self) -> np.ndarray:
        return self.__sigma

    @property
    def p(self) -> int:
        return self.__dag.p


class TrainingPair:
    """A permuted correlation matrix with its permuted CPDAG label"""

    def __init__(self, feature, label: PdagMatrix,
                 permutation: Optional[np.ndarray] = None) -> None:
        feature = np.array(feature, dtype=float)
        if feature.shape != (label.p, label.p):
            raise ValidationError(
                f"feature shape {feature.shape} does not match label over {label.p} nodes")
        if permutation is None:
            permutation = np.arange(label.p)
        permutation = np.array(permutation, dtype=np.int64)
        if sorted(permutation.tolist()) != list(range(label.p)):
            raise ValidationError("permutation must reorder 0..p-1")
        feature.setflags(write=False)
        permutation.setflags(write=False)
        self.__feature = feature
        self.__label = label
        self.__permutation = permutation

    def __repr__(self):
        return f"TrainingPair(p={self.p}, permutation={self.__permutation.tolist()})"

    @property
    def feature(self) -> np.ndarray:
        return self.__feature

    @property
    def label(self) -> PdagMatrix:
        return self.__label

    @property
    def permutation(self) -> np.ndarray:
        return self.__permutation

    @property
    def p(self) -> int:
        return self.__label.p
