"""The PC algorithm with Fisher-z or d-separation oracle independence tests"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import combinations
from math import sqrt
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from cpdag_discovery_tool.config import ALPHAS
from cpdag_discovery_tool.errors import SingularMatrixError, ValidationError
from cpdag_discovery_tool.graph import apply_meek_rules, d_separated, is_proper_cpdag
from cpdag_discovery_tool.models.pdag import PdagMatrix

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = ALPHAS

# Conditioning submatrices with a larger condition number count as singular
_MAX_CONDITION = 1e12


def _names(nodes: Sequence[int]) -> str:
    return "{" + ", ".join(f"X{k + 1}" for k in nodes) + "}"


def partial_correlation(c, i: int, j: int, s: Sequence[int] = ()) -> float:
    """Partial correlation of i and j given s from the inverse of the (i, j, s) submatrix"""
    c = np.asarray(c, dtype=float)
    s = list(s)
    idx = [i, j, *s]
    sub = c[np.ix_(idx, idx)]
    if s and np.linalg.cond(sub) > _MAX_CONDITION:
        raise SingularMatrixError(f"correlation submatrix for conditioning set {_names(s)} is singular")
    try:
        precision = np.linalg.inv(sub)
    except np.linalg.LinAlgError as err:
        raise SingularMatrixError(
            f"correlation submatrix for conditioning set {_names(s)} is singular") from err
    r = -precision[0, 1] / sqrt(precision[0, 0] * precision[1, 1])
    return float(np.clip(r, -1.0, 1.0))


def fisher_z_statistic(c, n: int, i: int, j: int, s: Sequence[int] = ()) -> float:
    """sqrt(n - |s| - 3) * |atanh(r)| for the partial correlation r"""
    dof = n - len(s) - 3
    if dof < 1:
        raise ValidationError(
            f"Fisher-z needs n - |S| - 3 >= 1, got n={n} with |S|={len(s)}")
    r = partial_correlation(c, i, j, s)
    if abs(r) >= 1.0:
        return float("inf")
    return sqrt(dof) * abs(np.arctanh(r))


def fisher_z_independent(c, n: int, i: int, j: int, s: Sequence[int], alpha: float) -> bool:
    """Whether the Fisher-z test accepts a vanishing partial correlation at level alpha"""
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    return fisher_z_statistic(c, n, i, j, s) <= norm.ppf(1 - alpha / 2)


class CiTest(ABC):
    """A conditional-independence decision procedure over nodes 0..p-1"""

    @property
    @abstractmethod
    def p(self) -> int:
        pass

    @abstractmethod
    def independent(self, i: int, j: int, s: Sequence[int]) -> bool:
        pass


class FisherZTest(CiTest):
    def __init__(self, correlation, n: int, alpha: float) -> None:
        correlation = np.asarray(correlation, dtype=float)
        if correlation.ndim != 2 or correlation.shape[0] != correlation.shape[1]:
            raise ValidationError(f"correlation matrix must be square, got {correlation.shape}")
        if not 0 < alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
        self.__c = correlation
        self.__n = n
        self.__alpha = alpha

    def __repr__(self):
        return f"FisherZTest(p={self.p}, n={self.__n}, alpha={self.__alpha})"

    @property
    def p(self) -> int:
        return self.__c.shape[0]

    def independent(self, i, j, s):
        return fisher_z_independent(self.__c, self.__n, i, j, s, self.__alpha)


class OracleTest(CiTest):
    """Independence read off a known DAG by d-separation"""

    def __init__(self, dag: PdagMatrix) -> None:
        self.__dag = dag.require_dag("oracle graph")

    def __repr__(self):
        return f"OracleTest(p={self.p})"

    @property
    def p(self) -> int:
        return self.__dag.p

    def independent(self, i, j, s):
        return d_separated(self.__dag, i, j, s)


class SepsetTable:
    """Separating sets of the node pairs whose edge was removed"""

    def __init__(self) -> None:
        self.__sets: Dict[Tuple[int, int], Tuple[int, ...]] = {}

    def __repr__(self):
        return f"SepsetTable({len(self.__sets)} pairs)"

    @staticmethod
    def _key(i: int, j: int) -> Tuple[int, int]:
        return (i, j) if i < j else (j, i)

    def record(self, i: int, j: int, s: Sequence[int]):
        self.__sets[self._key(i, j)] = tuple(sorted(s))

    def __contains__(self, pair) -> bool:
        return self._key(*pair) in self.__sets

    def __len__(self):
        return len(self.__sets)

    def get(self, i: int, j: int) -> Tuple[int, ...]:
        return self.__sets[self._key(i, j)]

    def items(self) -> Iterator[Tuple[Tuple[int, int], Tuple[int, ...]]]:
        return iter(sorted(self.__sets.items()))


@dataclass(frozen=True)
class PcResult:
    graph: PdagMatrix
    sepsets: SepsetTable
    collider_conflicts: int
    is_proper: bool


def _candidate_sets(adjacent: np.ndarray, i: int, j: int, level: int) -> Iterator[Tuple[int, ...]]:
    """Size-`level` subsets of adj(i)\\{j}, then unseen ones of adj(j)\\{i}, lexicographic"""
    seen = set()
    for a, b in ((i, j), (j, i)):
        neighbors = [k for k in np.flatnonzero(adjacent[a]).tolist() if k != b]
        for subset in combinations(neighbors, level):
            if subset not in seen:
                seen.add(subset)
                yield subset


def pc_skeleton(test: CiTest, p: int) -> Tuple[PdagMatrix, SepsetTable]:
    """Prune the complete graph by conditional independence, smallest sets first

    For each level l = 0, 1, ... every still-adjacent pair (i, j), in
    row-major order, is tested against every size-l subset of the current
    neighbors of i (then of j); the edge is removed at the first
    independence and the set recorded. Removals take effect immediately.
    The search stops once no adjacent pair has l neighbors to condition on.
    """
    if test.p != p:
        raise ValidationError(f"test covers {test.p} nodes, PC asked for {p}")
    adjacent = ~np.eye(p, dtype=bool)
    sepsets = SepsetTable()
    level = 0
    while True:
        testable = False
        for i, j in combinations(range(p), 2):
            if not adjacent[i, j]:
                continue
            if max(adjacent[i].sum(), adjacent[j].sum()) - 1 < level:
                continue
            testable = True
            for s in _candidate_sets(adjacent, i, j, level):
                if test.independent(i, j, s):
                    adjacent[i, j] = adjacent[j, i] = False
                    sepsets.record(i, j, s)
                    logger.debug("removed X%d - X%d given %s", i + 1, j + 1, _names(s))
                    break
        if not testable:
            break
        level += 1
    return PdagMatrix(adjacent.astype(np.uint8)), sepsets


def pc(test: CiTest, p: int) -> PcResult:
    """Run PC: skeleton search, collider orientation, Meek closure

    Each unshielded triple i - k - j (i < j, scanned by k then (i, j)) with
    k outside sepset(i, j) is oriented i -> k <- j. A later collider may
    reverse an arrow set by an earlier one; the last write wins and the
    reversal is counted in `collider_conflicts`. Under violated assumptions
    the output may not be a proper CPDAG; `is_proper` says which.
    """
    skeleton, sepsets = pc_skeleton(test, p)
    adjacent = skeleton.adjacency()
    m = skeleton.m.copy()
    conflicts = 0

    def orient(a: int, b: int) -> int:
        # a -> b; returns 1 when this reverses an existing b -> a
        reversed_edge = m[a, b] == 1 and m[b, a] == 0
        m[a, b], m[b, a] = 0, 1
        return int(reversed_edge)

    for k in range(p):
        neighbors = np.flatnonzero(adjacent[k]).tolist()
        for i, j in combinations(neighbors, 2):
            if adjacent[i, j] or k in sepsets.get(i, j):
                continue
            conflicts += orient(i, k) + orient(j, k)

    graph = apply_meek_rules(PdagMatrix(m))
    proper = is_proper_cpdag(graph)
    if conflicts:
        logger.warning("PC: %d collider orientation conflicts resolved last-write-wins", conflicts)
    if not proper:
        logger.warning("PC output is not a proper CPDAG")
    return PcResult(graph, sepsets, conflicts, proper)
