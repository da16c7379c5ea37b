from __future__ import annotations

from typing import Iterable, NamedTuple, Tuple

import networkx as nx
import numpy as np

from cpdag_discovery_tool.errors import NotADagError, ValidationError


class VStructure(NamedTuple):
    """An unshielded collider `a -> collider <- b`

    `parents` is kept sorted so two equal v-structures compare equal.
    """
    collider: int
    parents: Tuple[int, int]

    def __repr__(self):
        a, b = self.parents
        return f"VStructure(X{a + 1} -> X{self.collider + 1} <- X{b + 1})"


class PdagMatrix:
    """Adjacency matrix of a DAG, PDAG or CPDAG over nodes X1..Xp

    Row `i` holds the incoming marks of node `i` (0-based here, X{i+1} when
    displayed):

        m[i, j] = 0 and m[j, i] = 1  <=>  Xi -> Xj
        m[i, j] = 1 and m[j, i] = 0  <=>  Xi <- Xj
        m[i, j] = 1 and m[j, i] = 1  <=>  Xi -- Xj
        m[i, j] = 0 and m[j, i] = 0  <=>  no edge

    Instances are immutable: the wrapped array is a read-only copy.
    """

    def __init__(self, m) -> None:
        arr = np.array(m)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValidationError(f"adjacency matrix must be square, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValidationError("adjacency matrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        if arr.diagonal().any():
            raise ValidationError("adjacency matrix must have a zero diagonal")
        arr.setflags(write=False)
        self.__m = arr

    @classmethod
    def empty(cls, p: int) -> PdagMatrix:
        return cls(np.zeros((p, p), dtype=np.uint8))

    @classmethod
    def from_edges(cls, p: int, directed: Iterable[Tuple[int, int]] = (),
                   undirected: Iterable[Tuple[int, int]] = ()) -> PdagMatrix:
        """Build a graph from 0-based edge lists

        Args:
            p (int): Number of nodes
            directed (Iterable[Tuple[int, int]], optional): Pairs `(a, b)` meaning a -> b
            undirected (Iterable[Tuple[int, int]], optional): Pairs `(a, b)` meaning a -- b

        Returns:
            PdagMatrix: The graph
        """
        m = np.zeros((p, p), dtype=np.uint8)
        for a, b in directed:
            m[b, a] = 1
        for a, b in undirected:
            m[a, b] = m[b, a] = 1
        return cls(m)

    def __repr__(self):
        rows = ";".join("".join(str(v) for v in row) for row in self.__m)
        return f"PdagMatrix(p={self.p}, m='{rows}')"

    def __eq__(self, other):
        if not isinstance(other, PdagMatrix):
            return NotImplemented
        return self.__m.shape == other.m.shape and bool((self.__m == other.m).all())

    def __hash__(self):
        return hash((self.p, self.__m.tobytes()))

    # Getters
    @property
    def m(self) -> np.ndarray:
        return self.__m

    @property
    def p(self) -> int:
        return self.__m.shape[0]

    # Edge views, all p x p boolean arrays
    def adjacency(self) -> np.ndarray:
        """`A[a, b]` is True when a and b are joined by any edge"""
        m = self.__m.astype(bool)
        return m | m.T

    def directed(self) -> np.ndarray:
        """`D[a, b]` is True when the graph has a -> b"""
        m = self.__m.astype(bool)
        return m.T & ~m

    def undirected(self) -> np.ndarray:
        """`U[a, b]` is True when the graph has a -- b"""
        m = self.__m.astype(bool)
        return m & m.T

    def edges(self):
        """Directed edges `(a, b)` and undirected edges `(a, b)` with a < b, row-major"""
        d = np.argwhere(self.directed())
        u = np.argwhere(np.triu(self.undirected()))
        return [tuple(map(int, e)) for e in d], [tuple(map(int, e)) for e in u]

    def to_networkx(self) -> nx.DiGraph:
        """The directed part as a networkx DiGraph over nodes 0..p-1"""
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.p))
        graph.add_edges_from(map(tuple, np.argwhere(self.directed()).tolist()))
        return graph

    def has_directed_cycle(self) -> bool:
        return not nx.is_directed_acyclic_graph(self.to_networkx())

    def is_dag(self) -> bool:
        return not self.undirected().any() and not self.has_directed_cycle()

    def require_dag(self, name: str = "graph") -> PdagMatrix:
        """Return self, or raise NotADagError naming the argument"""
        if self.undirected().any():
            raise NotADagError(f"{name} must be a DAG but has undirected edges")
        if self.has_directed_cycle():
            raise NotADagError(f"{name} must be a DAG but has a directed cycle")
        return self

    def permuted(self, permutation) -> PdagMatrix:
        """Relabel nodes: new node `a` is old node `permutation[a]`"""
        perm = np.asarray(permutation)
        return PdagMatrix(self.__m[np.ix_(perm, perm)])
