from itertools import combinations
from typing import List

import numpy as np

from cpdag_discovery_tool.models.pdag import PdagMatrix, VStructure


def skeleton(g: PdagMatrix) -> PdagMatrix:
    """Drop all orientations: every adjacency becomes an undirected edge"""
    return PdagMatrix(g.adjacency())


def v_structures(g: PdagMatrix) -> List[VStructure]:
    """Return every unshielded collider `a -> c <- b` of the graph

    Only directed edges count as arrowheads, so undirected edges of a PDAG
    never take part. The output is sorted by collider, then parents.

    Args:
        g (PdagMatrix): The graph

    Returns:
        List[VStructure]: The v-structures in canonical order
    """
    adjacent = g.adjacency()
    directed = g.directed()
    found = []
    for c in range(g.p):
        parents = np.flatnonzero(directed[:, c])
        for a, b in combinations(parents.tolist(), 2):
            if not adjacent[a, b]:
                found.append(VStructure(c, (a, b)))
    return found


def v_structure_edges(g: PdagMatrix) -> np.ndarray:
    """`E[a, c]` is True when the edge a -> c is part of some v-structure"""
    marked = np.zeros((g.p, g.p), dtype=bool)
    for v in v_structures(g):
        a, b = v.parents
        marked[a, v.collider] = marked[b, v.collider] = True
    return marked
