import numpy as np

from cpdag_discovery_tool.models.pdag import PdagMatrix


class _Marks:
    """Mutable edge views used while orienting

    adjacent, directed (D[a, b] is a -> b) and undirected are kept in sync
    by `orient`, which only ever turns an undirected edge into a directed one.
    """

    def __init__(self, g: PdagMatrix) -> None:
        self.adjacent = g.adjacency()
        self.directed = g.directed()
        self.undirected = g.undirected()

    def orient(self, a: int, b: int):
        self.undirected[a, b] = self.undirected[b, a] = False
        self.directed[a, b] = True

    def to_pdag(self) -> PdagMatrix:
        m = self.undirected | self.directed.T
        return PdagMatrix(m.astype(np.uint8))


def _rule1(marks: _Marks, a: int, b: int) -> bool:
    # c -> a -- b with c, b non-adjacent
    return bool(np.any(marks.directed[:, a] & ~marks.adjacent[:, b]))


def _rule2(marks: _Marks, a: int, b: int) -> bool:
    # a -> c -> b with a -- b
    return bool(np.any(marks.directed[a, :] & marks.directed[:, b]))


def _rule3(marks: _Marks, a: int, b: int) -> bool:
    # a -- c -> b and a -- d -> b with c, d non-adjacent
    candidates = np.flatnonzero(marks.undirected[a, :] & marks.directed[:, b])
    if candidates.size < 2:
        return False
    block = marks.adjacent[np.ix_(candidates, candidates)]
    return bool(np.any(np.triu(~block, k=1)))


def _rule4(marks: _Marks, a: int, b: int) -> bool:
    # a -- d -> c -> b with a -- c and b, d non-adjacent
    d_nodes = marks.undirected[a, :] & ~marks.adjacent[b, :]
    d_nodes[b] = False
    c_nodes = marks.undirected[a, :] & marks.directed[:, b]
    if not d_nodes.any() or not c_nodes.any():
        return False
    return bool(np.any(marks.directed[np.ix_(d_nodes, c_nodes)]))


RULES = (_rule1, _rule2, _rule3, _rule4)


def apply_meek_rules(g: PdagMatrix) -> PdagMatrix:
    """Close a PDAG under Meek's orientation rules R1-R4

    Each pass applies R1, then R2, R3 and R4, every rule scanning ordered
    pairs (a, b) row-major and orienting a -- b as a -> b whenever its
    premise holds. Passes repeat until nothing changes. Adjacencies are
    never altered and existing orientations are never undone.

    Args:
        g (PdagMatrix): A graph without directed cycles

    Returns:
        PdagMatrix: The closed graph
    """
    marks = _Marks(g)
    p = g.p
    changed = True
    while changed:
        changed = False
        for rule in RULES:
            for a in range(p):
                for b in np.flatnonzero(marks.undirected[a]).tolist():
                    if marks.undirected[a, b] and rule(marks, a, b):
                        marks.orient(a, b)
                        changed = True
    return marks.to_pdag()
