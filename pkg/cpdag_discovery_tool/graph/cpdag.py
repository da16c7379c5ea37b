from typing import Optional

import numpy as np

from cpdag_discovery_tool.graph.basic import skeleton, v_structure_edges, v_structures
from cpdag_discovery_tool.graph.meek import apply_meek_rules
from cpdag_discovery_tool.models.pdag import PdagMatrix


def strip_to_pattern(g: PdagMatrix) -> PdagMatrix:
    """Keep the skeleton and the arrowheads of v-structure edges only

    Args:
        g (PdagMatrix): Any graph

    Returns:
        PdagMatrix: Same adjacencies; edges in a v-structure of g keep their
            orientation, every other edge is undirected
    """
    keep = v_structure_edges(g)
    adjacent = g.adjacency()
    # an undirected pair gets both marks unless it is one of the kept arrows
    m = adjacent & ~keep
    return PdagMatrix(m.astype(np.uint8))


def dag_to_cpdag(dag: PdagMatrix) -> PdagMatrix:
    """CPDAG of the Markov equivalence class of a DAG

    The pattern (skeleton plus v-structures) closed under Meek's rules.
    """
    dag.require_dag("dag_to_cpdag input")
    return apply_meek_rules(strip_to_pattern(dag))


def markov_equivalent(d1: PdagMatrix, d2: PdagMatrix) -> bool:
    """Whether two DAGs share skeleton and v-structures"""
    d1.require_dag("first DAG")
    d2.require_dag("second DAG")
    if d1.p != d2.p:
        return False
    return skeleton(d1) == skeleton(d2) and v_structures(d1) == v_structures(d2)


def consistent_extension(g: PdagMatrix) -> Optional[PdagMatrix]:
    """Orient every undirected edge without new v-structures or cycles

    Repeatedly removes a node x that has no outgoing directed edge and whose
    undirected neighbors are each adjacent to all other neighbors of x,
    orienting those undirected edges into x. The lowest such node index is
    taken first.

    Args:
        g (PdagMatrix): A partially directed graph

    Returns:
        Optional[PdagMatrix]: A DAG keeping all directed edges of g and its
            skeleton, or None when no such DAG exists
    """
    p = g.p
    adjacent = g.adjacency()
    directed = g.directed()
    undirected = g.undirected()
    result = directed.copy()
    remaining = np.ones(p, dtype=bool)

    for _ in range(p):
        for x in np.flatnonzero(remaining).tolist():
            if np.any(directed[x] & remaining):
                continue
            neighbors = np.flatnonzero(adjacent[x] & remaining)
            loose = np.flatnonzero(undirected[x] & remaining)
            if all(adjacent[y, neighbors[neighbors != y]].all() for y in loose):
                break
        else:
            return None
        result[loose, x] = True
        remaining[x] = False
    return PdagMatrix(result.T.astype(np.uint8))


def is_proper_cpdag(g: PdagMatrix) -> bool:
    """Whether g is exactly the CPDAG of some Markov equivalence class"""
    extension = consistent_extension(g)
    if extension is None:
        return False
    return dag_to_cpdag(extension) == g
