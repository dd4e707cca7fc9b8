import os
import sys
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

if sys.version_info >= (3, 9):
    from collections.abc import Iterable, Iterator
else:
    from typing import Iterable, Iterator

import networkx as nx

from .base import (
    DEFAULT_EXTENSION_LIMIT,
    DirectedEdge,
    EnumerationLimitError,
    GraphError,
    NodeId,
    NodeSet,
    NotSaMpdagError,
    OrientationConflictError,
    UndirectedEdge,
    UnknownNodeError,
    sorted_nodes,
)
from .graph import (
    PDGraph,
    find_semi_directed_cycle,
    is_dag,
    load_graph_document,
    parse_graph_document,
    unshielded_colliders,
)
from .logger import logger


class BackgroundKnowledge:
    """A set of required directed edges."""

    def __init__(self, edges: Iterable[DirectedEdge] = ()):
        self._edges = frozenset((u, v) for u, v in edges)
        for u, v in sorted(self._edges):
            if u == v:
                raise GraphError(f"background knowledge contains a self-loop on '{u}'")
            if (v, u) in self._edges:
                raise OrientationConflictError(f"background knowledge requires both {u}->{v} and {v}->{u}", (u, v))

    @property
    def edges(self) -> FrozenSet[DirectedEdge]:
        return self._edges

    def check_against(self, g: PDGraph) -> None:
        for u, v in sorted(self._edges):
            for n in (u, v):
                if n not in g.node_set:
                    raise UnknownNodeError(n)

    def __len__(self) -> int:
        return len(self._edges)

    def __iter__(self) -> Iterator[DirectedEdge]:
        yield from sorted(self._edges)

    def __contains__(self, __x: object) -> bool:
        return __x in self._edges

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, BackgroundKnowledge):
            return self._edges == __o._edges
        return False

    def __hash__(self) -> int:
        return hash(self._edges)

    def __repr__(self) -> str:
        return "BackgroundKnowledge([" + ", ".join(f"{u}->{v}" for u, v in self) + "])"


class _OrientationState:
    def __init__(self, g: PDGraph):
        self._nodes = g.nodes
        self._directed: Set[DirectedEdge] = set(g.directed_edges)
        self._undirected: Set[UndirectedEdge] = set(g.undirected_edges)
        self._parents: Dict[NodeId, Set[NodeId]] = {n: set(g.parents_of(n)) for n in g.nodes}
        self._neighbors: Dict[NodeId, Set[NodeId]] = {n: set(g.neighbors_of(n)) for n in g.nodes}
        self._adjacent: Dict[NodeId, NodeSet] = {n: g.adjacent_to(n) for n in g.nodes}

    def is_adjacent(self, u: NodeId, v: NodeId) -> bool:
        return v in self._adjacent[u]

    def is_directed(self, u: NodeId, v: NodeId) -> bool:
        return (u, v) in self._directed

    def orient(self, u: NodeId, v: NodeId) -> bool:
        if (u, v) in self._directed:
            return False
        if (v, u) in self._directed:
            raise OrientationConflictError(f"cannot orient {u}->{v}: the graph already has {v}->{u}", (u, v))
        edge = frozenset((u, v))
        if edge not in self._undirected:
            raise OrientationConflictError(f"cannot orient {u}->{v}: the nodes are not adjacent", (u, v))
        self._undirected.remove(edge)
        self._directed.add((u, v))
        self._neighbors[u].discard(v)
        self._neighbors[v].discard(u)
        self._parents[v].add(u)
        return True

    def forces(self, a: NodeId, b: NodeId) -> bool:
        """Whether one of the four orientation rules orients the undirected edge ``a - b`` as ``a -> b``."""
        # R1: c -> a - b, c and b non-adjacent
        if any(not self.is_adjacent(c, b) for c in self._parents[a]):
            return True
        # R2: a -> c -> b
        if any(self.is_directed(a, c) for c in self._parents[b]):
            return True
        around = sorted(self._neighbors[a] & self._parents[b])
        # R3: a - c -> b, a - d -> b, c and d non-adjacent
        for i, c in enumerate(around):
            if any(not self.is_adjacent(c, d) for d in around[i + 1 :]):
                return True
        # R4: a - c -> d -> b, c and b non-adjacent, a and d adjacent
        for d in self._parents[b]:
            if not self.is_adjacent(a, d):
                continue
            if any(self.is_directed(c, d) and not self.is_adjacent(c, b) for c in self._neighbors[a]):
                return True
        return False

    def sweep(self) -> Set[DirectedEdge]:
        forced: Set[DirectedEdge] = set()
        for edge in self._undirected:
            u, v = sorted(edge)
            if self.forces(u, v):
                forced.add((u, v))
            if self.forces(v, u):
                forced.add((v, u))
        for u, v in sorted(forced):
            if (v, u) in forced:
                raise OrientationConflictError(f"orientation rules force both {u}->{v} and {v}->{u}", (u, v))
        return forced

    def to_graph(self) -> PDGraph:
        return PDGraph(self._nodes, self._directed, self._undirected)


def meek_close(g: PDGraph, bk: Optional[BackgroundKnowledge] = None) -> PDGraph:
    """Orient ``bk`` and then apply the orientation rules until nothing changes."""
    bk = BackgroundKnowledge() if bk is None else bk
    bk.check_against(g)
    state = _OrientationState(g)
    for u, v in bk:
        state.orient(u, v)
    sweeps = 0
    while True:
        forced = state.sweep()
        if len(forced) == 0:
            break
        sweeps += 1
        for u, v in sorted(forced):
            state.orient(u, v)
    logger.debug(f"orientation rules reached a fixed point after {sweeps} sweep(s)")
    result = state.to_graph()
    if not nx.is_directed_acyclic_graph(result.directed_graph()):
        cycle = nx.find_cycle(result.directed_graph())
        raise OrientationConflictError(
            "orientation produced a directed cycle: " + " -> ".join(u for u, _ in cycle), cycle[0]
        )
    return result


def find_forbidden_triple(g: PDGraph) -> Optional[Tuple[NodeId, NodeId, NodeId]]:
    """First ``(I, J, K)`` with ``I -> J - K`` and ``I``, ``K`` non-adjacent."""
    for j in sorted_nodes(g.nodes):
        for i in sorted_nodes(g.parents_of(j)):
            for k in sorted_nodes(g.neighbors_of(j)):
                if not g.is_adjacent(i, k):
                    return (i, j, k)
    return None


def _check_sa_mpdag(g: PDGraph) -> None:
    cycle = find_semi_directed_cycle(g)
    if cycle is not None:
        raise NotSaMpdagError(f"graph has a semi-directed cycle: {' ~ '.join(cycle)} ~ {cycle[0]}", cycle)
    triple = find_forbidden_triple(g)
    if triple is not None:
        i, j, k = triple
        raise NotSaMpdagError(f"graph has {i} -> {j} -- {k} with {i} and {k} non-adjacent", triple)
    try:
        closed = meek_close(g)
    except OrientationConflictError as e:
        raise NotSaMpdagError(f"graph is not closed under the orientation rules: {e}", tuple(e.edge or ()))
    if closed != g:
        u, v = sorted(closed.directed_edges - g.directed_edges)[0]
        raise NotSaMpdagError(f"graph is not closed under the orientation rules: {u} -> {v} is forced", (u, v))


class SaMpdag:
    """A validated strictly acyclic MPDAG, optionally remembering the background knowledge it came from."""

    def __init__(self, graph: PDGraph, provenance: Optional[BackgroundKnowledge] = None):
        _check_sa_mpdag(graph)
        self._graph = graph
        self._provenance = provenance

    @property
    def graph(self) -> PDGraph:
        return self._graph

    @property
    def provenance(self) -> Optional[BackgroundKnowledge]:
        return self._provenance

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._graph.nodes

    @property
    def node_set(self) -> NodeSet:
        return self._graph.node_set

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, SaMpdag):
            return self.graph == __o.graph and self.provenance == __o.provenance
        return False

    def __hash__(self) -> int:
        return hash((self._graph, self._provenance))

    def __repr__(self) -> str:
        return f"SaMpdag({self._graph!r}, provenance={self._provenance!r})"


GraphLike = Union[SaMpdag, PDGraph]


def graph_of(g: GraphLike) -> PDGraph:
    return g.graph if isinstance(g, SaMpdag) else g


def validate_sa_mpdag(g: PDGraph, provenance: Optional[BackgroundKnowledge] = None) -> SaMpdag:
    return SaMpdag(g, provenance)


def enumerate_extensions(g: SaMpdag, limit: int = DEFAULT_EXTENSION_LIMIT) -> List[PDGraph]:
    """All DAGs represented by ``g``, in canonical order.

    Undirected edges are oriented one at a time, each choice followed by the orientation rules;
    branches the rules reject are pruned.
    """
    colliders = unshielded_colliders(g.graph)
    found: Dict[Tuple[object, ...], PDGraph] = {}
    stack = [g.graph]
    while stack:
        current = stack.pop()
        if current.is_fully_directed:
            if is_dag(current) and unshielded_colliders(current) == colliders:
                found[current.canonical_key()] = current
                if len(found) > limit:
                    raise EnumerationLimitError(f"more than {limit} consistent extensions")
            else:
                logger.warning(f"dropping an orientation that is not a consistent extension: {current!r}")
            continue
        u, v = current.sorted_undirected_edges()[0]
        for tail, head in ((v, u), (u, v)):
            try:
                stack.append(meek_close(current, BackgroundKnowledge([(tail, head)])))
            except OrientationConflictError as e:
                logger.debug(f"pruned {tail}->{head}: {e}")
    if len(found) == 0:
        raise GraphError(f"{g!r} has no consistent extension")
    logger.debug(f"{len(found)} consistent extension(s)")
    return [found[k] for k in sorted(found)]


def cpdag_of(dag: PDGraph) -> PDGraph:
    if not is_dag(dag):
        raise GraphError(f"cpdag_of expects a directed acyclic graph, got {dag!r}")
    compelled = set()
    for i, k, j in unshielded_colliders(dag):
        compelled.add((i, k))
        compelled.add((j, k))
    reversible = [frozenset(e) for e in dag.directed_edges if e not in compelled]
    return meek_close(PDGraph(dag.nodes, compelled, reversible))


def sa_mpdag_from_text(text: str, source: str = "<string>") -> SaMpdag:
    graph, background = parse_graph_document(text, source)
    return _close_and_validate(graph, background)


def load_sa_mpdag(path: Union[str, "os.PathLike[str]"]) -> SaMpdag:
    graph, background = load_graph_document(path)
    return _close_and_validate(graph, background)


def _close_and_validate(graph: PDGraph, background: FrozenSet[DirectedEdge]) -> SaMpdag:
    if len(background) == 0:
        return validate_sa_mpdag(graph)
    bk = BackgroundKnowledge(background)
    return validate_sa_mpdag(meek_close(graph, bk), provenance=bk)
