import sys
from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Set, Tuple

if sys.version_info >= (3, 9):
    from collections.abc import Hashable, Iterable, Iterator
else:
    from typing import Hashable, Iterable, Iterator

import networkx as nx

from .base import GraphError, NodeId, NodeSet, format_nodes, sorted_nodes
from .graph import PDGraph, cast_pair, chain_components, skeleton
from .logger import logger


class MinimalComplex(Hashable):
    """An induced path ``left -> core[0] - ... - core[-1] <- right`` with ``left`` and ``right`` non-adjacent."""

    def __init__(self, left: NodeId, core: Iterable[NodeId], right: NodeId):
        path = tuple(core)
        if len(path) == 0:
            raise GraphError("a minimal complex needs a non-empty core")
        if right < left:
            left, right, path = right, left, tuple(reversed(path))
        self._left = left
        self._core = path
        self._right = right

    @property
    def left(self) -> NodeId:
        return self._left

    @property
    def core(self) -> Tuple[NodeId, ...]:
        return self._core

    @property
    def right(self) -> NodeId:
        return self._right

    def key(self) -> Tuple[FrozenSet[NodeId], FrozenSet[NodeId]]:
        return (frozenset((self._left, self._right)), frozenset(self._core))

    def sort_key(self) -> Tuple[NodeId, NodeId, Tuple[NodeId, ...]]:
        return (self._left, self._right, sorted_nodes(self._core))

    def to_dict(self) -> Dict[str, Any]:
        return {"left": self._left, "core": list(self._core), "right": self._right}

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, MinimalComplex):
            return self.key() == __o.key()
        return False

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"MinimalComplex({self._left!r}, {list(self._core)!r}, {self._right!r})"

    def __str__(self) -> str:
        return f"{self._left} -> " + " -- ".join(self._core) + f" <- {self._right}"


class WitnessKind(str, Enum):
    skeleton = "skeleton"
    complex = "complex"
    nodes = "nodes"


class EquivalenceWitness:
    """Why two graphs are not equivalent. ``graph_index`` (0 or 1) names the graph holding the unmatched item."""

    def __init__(
        self,
        kind: WitnessKind,
        graph_index: int,
        edge: Optional[Tuple[NodeId, NodeId]] = None,
        minimal_complex: Optional[MinimalComplex] = None,
        nodes: Optional[NodeSet] = None,
    ):
        self._kind = kind
        self._graph_index = graph_index
        self._edge = edge
        self._minimal_complex = minimal_complex
        self._nodes = nodes

    @property
    def kind(self) -> WitnessKind:
        return self._kind

    @property
    def graph_index(self) -> int:
        return self._graph_index

    @property
    def edge(self) -> Optional[Tuple[NodeId, NodeId]]:
        return self._edge

    @property
    def minimal_complex(self) -> Optional[MinimalComplex]:
        return self._minimal_complex

    @property
    def nodes(self) -> Optional[NodeSet]:
        return self._nodes

    def describe(self) -> str:
        if self._kind == WitnessKind.skeleton and self._edge is not None:
            u, v = self._edge
            return f"adjacency {u} -- {v} appears only in graph {self._graph_index + 1}"
        if self._kind == WitnessKind.complex and self._minimal_complex is not None:
            return f"minimal complex {self._minimal_complex} appears only in graph {self._graph_index + 1}"
        return f"nodes {format_nodes(self._nodes or ())} appear only in graph {self._graph_index + 1}"

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {"kind": self._kind.value, "graph_index": self._graph_index}
        if self._edge is not None:
            d["edge"] = list(self._edge)
        if self._minimal_complex is not None:
            d["complex"] = self._minimal_complex.to_dict()
        if self._nodes is not None:
            d["nodes"] = list(sorted_nodes(self._nodes))
        return d


class EquivalenceVerdict:
    def __init__(self, equivalent: bool, witness: Optional[EquivalenceWitness] = None):
        if equivalent == (witness is not None):
            raise ValueError("a witness is required exactly when the graphs are not equivalent")
        self._equivalent = equivalent
        self._witness = witness

    @property
    def equivalent(self) -> bool:
        return self._equivalent

    @property
    def witness(self) -> Optional[EquivalenceWitness]:
        return self._witness

    def __bool__(self) -> bool:
        return self._equivalent

    def describe(self) -> str:
        if self._witness is None:
            return "equivalent"
        return f"not equivalent: {self._witness.describe()}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equivalent": self._equivalent,
            "witness": None if self._witness is None else self._witness.to_dict(),
        }

    def __repr__(self) -> str:
        return f"EquivalenceVerdict({self.describe()!r})"


def _is_minimal(g: PDGraph, left: NodeId, path: List[NodeId], right: NodeId) -> bool:
    if not (g.has_directed(left, path[0]) and g.has_directed(right, path[-1])):
        return False
    for n in path[1:]:
        if g.is_adjacent(left, n):
            return False
    for n in path[:-1]:
        if g.is_adjacent(right, n):
            return False
    return True


def _chordless_paths(
    undirected: "nx.Graph[NodeId]", allowed: Set[NodeId], s: NodeId, e: NodeId
) -> Iterator[List[NodeId]]:
    """Induced paths from ``s`` to ``e`` through ``allowed``, in sorted-node order."""
    stack: List[List[NodeId]] = [[s]]
    while len(stack) > 0:
        path = stack.pop()
        tail = path[-1]
        if tail == e:
            yield path
            continue
        for n in reversed(sorted_nodes(set(undirected.neighbors(tail)) & allowed)):
            if n in path or any(undirected.has_edge(n, m) for m in path[:-1]):
                continue
            stack.append(path + [n])


def minimal_complexes(g: PDGraph) -> List[MinimalComplex]:
    """All minimal complexes of the chain graph ``g``, sorted by endpoints and core."""
    partition = chain_components(g)
    undirected = g.undirected_graph()
    found: Dict[Tuple[FrozenSet[NodeId], FrozenSet[NodeId]], MinimalComplex] = {}
    nodes = sorted_nodes(g.nodes)
    for a, left in enumerate(nodes):
        for right in nodes[a + 1 :]:
            if g.is_adjacent(left, right):
                continue
            for component in partition.ordered():
                starts = sorted_nodes(component & g.children_of(left))
                ends = sorted_nodes(component & g.children_of(right))
                if len(starts) == 0 or len(ends) == 0:
                    continue
                interior = {n for n in component if not g.is_adjacent(left, n) and not g.is_adjacent(right, n)}
                for s in starts:
                    for e in ends:
                        if s != e and (g.is_adjacent(right, s) or g.is_adjacent(left, e)):
                            continue
                        allowed = interior | {s, e}
                        for path in _chordless_paths(undirected, allowed, s, e):
                            if _is_minimal(g, left, path, right):
                                mc = MinimalComplex(left, path, right)
                                found.setdefault(mc.key(), mc)
    return sorted(found.values(), key=MinimalComplex.sort_key)


def _node_set_witness(g1: PDGraph, g2: PDGraph) -> Optional[EquivalenceWitness]:
    only1 = g1.node_set - g2.node_set
    if len(only1) > 0:
        return EquivalenceWitness(WitnessKind.nodes, 0, nodes=only1)
    only2 = g2.node_set - g1.node_set
    if len(only2) > 0:
        return EquivalenceWitness(WitnessKind.nodes, 1, nodes=only2)
    return None


def equivalent(g1: PDGraph, g2: PDGraph) -> EquivalenceVerdict:
    """Chain-graph Markov equivalence: equal skeletons and equal sets of minimal complexes."""
    if g1.node_set != g2.node_set:
        raise GraphError(
            f"cannot compare graphs over different nodes: {format_nodes(g1.node_set)} and {format_nodes(g2.node_set)}"
        )
    adjacencies = [skeleton(g).undirected_edges for g in (g1, g2)]
    for index in (0, 1):
        extra = sorted(cast_pair(e) for e in adjacencies[index] - adjacencies[1 - index])
        if len(extra) > 0:
            return EquivalenceVerdict(False, EquivalenceWitness(WitnessKind.skeleton, index, edge=extra[0]))
    complexes = [minimal_complexes(g) for g in (g1, g2)]
    keys = [{mc.key() for mc in c} for c in complexes]
    for index in (0, 1):
        for mc in complexes[index]:
            if mc.key() not in keys[1 - index]:
                return EquivalenceVerdict(False, EquivalenceWitness(WitnessKind.complex, index, minimal_complex=mc))
    return EquivalenceVerdict(True)


def equivalent_or_node_mismatch(g1: PDGraph, g2: PDGraph) -> EquivalenceVerdict:
    """Like :func:`equivalent`, but graphs over different nodes are reported as not equivalent."""
    witness = _node_set_witness(g1, g2)
    if witness is not None:
        logger.debug(f"node sets differ: {witness.describe()}")
        return EquivalenceVerdict(False, witness)
    return equivalent(g1, g2)


def rm_pattern_violation(g: PDGraph) -> Optional[Tuple[NodeId, NodeId, NodeId]]:
    """First ``(I, J, K)`` with ``I -> J - K`` but no edge ``I -> K``."""
    for j in sorted_nodes(g.nodes):
        for i in sorted_nodes(g.parents_of(j)):
            for k in sorted_nodes(g.neighbors_of(j)):
                if not g.has_directed(i, k):
                    return (i, j, k)
    return None


def rm_pattern_check(g: PDGraph) -> bool:
    return rm_pattern_violation(g) is None
