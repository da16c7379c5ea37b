from typing import Iterable

import networkx as nx

from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.models.pdag import PdagMatrix


def d_separated(dag: PdagMatrix, i: int, j: int, s: Iterable[int] = ()) -> bool:
    """Whether `s` d-separates nodes `i` and `j` in a DAG

    Uses the moral ancestral graph: i and j are d-separated by s exactly when
    they are disconnected in the moralized subgraph induced by the ancestors
    of {i, j} and s, after the nodes of s are removed.

    Args:
        dag (PdagMatrix): The DAG
        i (int): First node (0-based)
        j (int): Second node (0-based)
        s (Iterable[int], optional): Conditioning set. Defaults to ().

    Returns:
        bool: True if every path between i and j is blocked by s
    """
    dag.require_dag("d_separated input")
    s = set(int(k) for k in s)
    if i == j:
        raise ValidationError("d_separated needs two distinct nodes")
    if i in s or j in s:
        raise ValidationError("the conditioning set must not contain i or j")
    for node in (i, j, *s):
        if not 0 <= node < dag.p:
            raise ValidationError(f"node index {node} outside 0..{dag.p - 1}")

    graph = dag.to_networkx()
    keep = {i, j} | s
    for node in list(keep):
        keep |= nx.ancestors(graph, node)
    moral = nx.moral_graph(graph.subgraph(keep))
    moral.remove_nodes_from(s)
    return not nx.has_path(moral, i, j)
