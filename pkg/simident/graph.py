import os
import re
import sys
from collections import deque
from collections.abc import Hashable
from typing import Deque, Dict, FrozenSet, List, Optional, Set, Tuple, Union

if sys.version_info >= (3, 9):
    from collections.abc import Iterable, Iterator, Sequence
else:
    from typing import Iterable, Iterator, Sequence

import networkx as nx

from .base import (
    DirectedEdge,
    GraphError,
    NodeId,
    NodeSet,
    ParseError,
    SemiDirectedCycleError,
    UndirectedEdge,
    UnknownNodeError,
    sorted_nodes,
)


class PDGraph(Hashable):
    """Mixed graph over named nodes with directed and undirected edges.

    Instances are immutable. Every node pair carries at most one edge; a second edge on the
    same pair, a self-loop or an endpoint outside ``nodes`` raises :class:`GraphError`.
    """

    def __init__(
        self,
        nodes: Iterable[NodeId],
        directed_edges: Iterable[DirectedEdge] = (),
        undirected_edges: Iterable[Iterable[NodeId]] = (),
    ) -> None:
        ordered: List[NodeId] = []
        for n in nodes:
            if not isinstance(n, str) or len(n) == 0:
                raise GraphError(f"node names must be non-empty strings, not {n!r}")
            if n not in ordered:
                ordered.append(n)
        self._nodes = tuple(ordered)
        self._node_set = frozenset(ordered)
        self._slots: Set[UndirectedEdge] = set()
        parents: Dict[NodeId, Set[NodeId]] = {n: set() for n in ordered}
        children: Dict[NodeId, Set[NodeId]] = {n: set() for n in ordered}
        neighbors: Dict[NodeId, Set[NodeId]] = {n: set() for n in ordered}
        directed: Set[DirectedEdge] = set()
        undirected: Set[UndirectedEdge] = set()
        for tail, head in directed_edges:
            self._claim_slot(tail, head)
            directed.add((tail, head))
            parents[head].add(tail)
            children[tail].add(head)
        for edge in undirected_edges:
            pair = tuple(edge)
            if len(pair) != 2:
                raise GraphError(f"undirected edge must join two distinct nodes, got {pair!r}")
            u, v = pair
            self._claim_slot(u, v)
            undirected.add(frozenset(pair))
            neighbors[u].add(v)
            neighbors[v].add(u)
        self._directed = frozenset(directed)
        self._undirected = frozenset(undirected)
        self._parents = {n: frozenset(s) for n, s in parents.items()}
        self._children = {n: frozenset(s) for n, s in children.items()}
        self._neighbors = {n: frozenset(s) for n, s in neighbors.items()}

    def _claim_slot(self, u: NodeId, v: NodeId) -> None:
        for n in (u, v):
            if n not in self._node_set:
                raise UnknownNodeError(n)
        if u == v:
            raise GraphError(f"self-loop on node '{u}'")
        slot = frozenset((u, v))
        if slot in self._slots:
            raise GraphError(f"more than one edge between '{u}' and '{v}'")
        self._slots.add(slot)

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._nodes

    @property
    def node_set(self) -> NodeSet:
        return self._node_set

    @property
    def directed_edges(self) -> FrozenSet[DirectedEdge]:
        return self._directed

    @property
    def undirected_edges(self) -> FrozenSet[UndirectedEdge]:
        return self._undirected

    @property
    def edge_count(self) -> int:
        return len(self._directed) + len(self._undirected)

    @property
    def is_fully_directed(self) -> bool:
        return len(self._undirected) == 0

    def check_nodes(self, d: Iterable[NodeId]) -> NodeSet:
        checked = frozenset(d)
        for n in sorted_nodes(checked):
            if n not in self._node_set:
                raise UnknownNodeError(n)
        return checked

    def parents_of(self, node: NodeId) -> NodeSet:
        self.check_nodes((node,))
        return self._parents[node]

    def children_of(self, node: NodeId) -> NodeSet:
        self.check_nodes((node,))
        return self._children[node]

    def neighbors_of(self, node: NodeId) -> NodeSet:
        """Undirected neighbours only."""
        self.check_nodes((node,))
        return self._neighbors[node]

    def adjacent_to(self, node: NodeId) -> NodeSet:
        self.check_nodes((node,))
        return self._parents[node] | self._children[node] | self._neighbors[node]

    def is_adjacent(self, u: NodeId, v: NodeId) -> bool:
        return frozenset((u, v)) in self._slots

    def has_directed(self, tail: NodeId, head: NodeId) -> bool:
        return (tail, head) in self._directed

    def has_undirected(self, u: NodeId, v: NodeId) -> bool:
        return frozenset((u, v)) in self._undirected

    def sorted_directed_edges(self) -> Tuple[DirectedEdge, ...]:
        return tuple(sorted(self._directed))

    def sorted_undirected_edges(self) -> Tuple[Tuple[NodeId, NodeId], ...]:
        return tuple(sorted(cast_pair(e) for e in self._undirected))

    def canonical_key(self) -> Tuple[Tuple[NodeId, ...], Tuple[DirectedEdge, ...], Tuple[Tuple[NodeId, NodeId], ...]]:
        return (sorted_nodes(self._nodes), self.sorted_directed_edges(), self.sorted_undirected_edges())

    def directed_graph(self) -> "nx.DiGraph[NodeId]":
        dg: "nx.DiGraph[NodeId]" = nx.DiGraph()
        dg.add_nodes_from(self._nodes)
        dg.add_edges_from(self._directed)
        return dg

    def undirected_graph(self) -> "nx.Graph[NodeId]":
        ug: "nx.Graph[NodeId]" = nx.Graph()
        ug.add_nodes_from(self._nodes)
        ug.add_edges_from(cast_pair(e) for e in self._undirected)
        return ug

    def semi_directed_graph(self) -> "nx.DiGraph[NodeId]":
        """Directed edges kept, undirected edges traversable both ways."""
        dg = self.directed_graph()
        for u, v in (cast_pair(e) for e in self._undirected):
            dg.add_edge(u, v)
            dg.add_edge(v, u)
        return dg

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, PDGraph):
            return (
                self.node_set == __o.node_set
                and self.directed_edges == __o.directed_edges
                and self.undirected_edges == __o.undirected_edges
            )
        return False

    def __hash__(self) -> int:
        return hash((self._node_set, self._directed, self._undirected))

    def __repr__(self) -> str:
        directed = ", ".join(f"{u}->{v}" for u, v in self.sorted_directed_edges())
        undirected = ", ".join(f"{u}--{v}" for u, v in self.sorted_undirected_edges())
        return f"PDGraph(nodes={list(self._nodes)}, directed=[{directed}], undirected=[{undirected}])"


def cast_pair(edge: Iterable[NodeId]) -> Tuple[NodeId, NodeId]:
    u, v = sorted(edge)
    return (u, v)


class ChainPartition:
    """Chain components of a graph together with a topological order of the components."""

    def __init__(self, components: Sequence[NodeSet], component_order: Sequence[int]):
        self._components = tuple(components)
        self._component_order = tuple(component_order)
        self._index = {n: i for i, c in enumerate(self._components) for n in c}

    @property
    def components(self) -> Tuple[NodeSet, ...]:
        return self._components

    @property
    def component_order(self) -> Tuple[int, ...]:
        return self._component_order

    def ordered(self) -> Tuple[NodeSet, ...]:
        return tuple(self._components[i] for i in self._component_order)

    def component_of(self, node: NodeId) -> NodeSet:
        try:
            return self._components[self._index[node]]
        except KeyError:
            raise UnknownNodeError(node)

    def __len__(self) -> int:
        return len(self._components)

    def __iter__(self) -> Iterator[NodeSet]:
        yield from self.ordered()


def parents(g: PDGraph, d: Iterable[NodeId]) -> NodeSet:
    return frozenset(p for n in g.check_nodes(d) for p in g.parents_of(n))


def ancestors(g: PDGraph, d: Iterable[NodeId]) -> NodeSet:
    """``d`` together with every node that has a directed path into ``d``."""
    targets = g.check_nodes(d)
    dg = g.directed_graph()
    result: Set[NodeId] = set(targets)
    for n in targets:
        result |= nx.ancestors(dg, n)
    return frozenset(result)


def induced_subgraph(g: PDGraph, d: Iterable[NodeId]) -> PDGraph:
    keep = g.check_nodes(d)
    return PDGraph(
        (n for n in g.nodes if n in keep),
        (e for e in g.directed_edges if e[0] in keep and e[1] in keep),
        (e for e in g.undirected_edges if e <= keep),
    )


def skeleton(g: PDGraph) -> PDGraph:
    return PDGraph(g.nodes, (), [frozenset(e) for e in g.directed_edges] + list(g.undirected_edges))


def is_dag(g: PDGraph) -> bool:
    return g.is_fully_directed and nx.is_directed_acyclic_graph(g.directed_graph())


def unshielded_colliders(g: PDGraph) -> FrozenSet[Tuple[NodeId, NodeId, NodeId]]:
    """Triples ``(I, K, J)`` with ``I < J``, ``I -> K <- J`` and ``I``, ``J`` non-adjacent."""
    result = set()
    for k in g.nodes:
        pa = sorted_nodes(g.parents_of(k))
        for idx, i in enumerate(pa):
            for j in pa[idx + 1 :]:
                if not g.is_adjacent(i, j):
                    result.add((i, k, j))
    return frozenset(result)


def find_semi_directed_cycle(g: PDGraph) -> Optional[Tuple[NodeId, ...]]:
    sdg = g.semi_directed_graph()
    component_index: Dict[NodeId, int] = {}
    for i, scc in enumerate(nx.strongly_connected_components(sdg)):
        for n in scc:
            component_index[n] = i
    for tail, head in g.sorted_directed_edges():
        if component_index[tail] == component_index[head]:
            path = nx.shortest_path(sdg, head, tail)
            return (tail,) + tuple(path[:-1])
    return None


def has_semi_directed_cycle(g: PDGraph) -> bool:
    return find_semi_directed_cycle(g) is not None


def _undirected_components(g: PDGraph) -> List[NodeSet]:
    return sorted((frozenset(c) for c in nx.connected_components(g.undirected_graph())), key=min)


def chain_components(g: PDGraph) -> ChainPartition:
    cycle = find_semi_directed_cycle(g)
    if cycle is not None:
        raise SemiDirectedCycleError(cycle)
    components = _undirected_components(g)
    index = {n: i for i, c in enumerate(components) for n in c}
    quotient: "nx.DiGraph[int]" = nx.DiGraph()
    quotient.add_nodes_from(range(len(components)))
    quotient.add_edges_from((index[u], index[v]) for u, v in g.directed_edges)
    order = nx.lexicographical_topological_sort(quotient, key=lambda i: min(components[i]))
    return ChainPartition(components, list(order))


def chain_decomposition(g: PDGraph, d: Iterable[NodeId]) -> List[NodeSet]:
    subset = g.check_nodes(d)
    return [subset & c for c in chain_components(g).ordered() if subset & c]


def containing_component(g: PDGraph, di: Iterable[NodeId]) -> NodeSet:
    block = g.check_nodes(di)
    if len(block) == 0:
        raise GraphError("cannot locate the chain component of an empty node set")
    for c in _undirected_components(g):
        if block <= c:
            return c
    raise GraphError(f"nodes {sorted_nodes(block)} straddle several chain components")


def exists_blocking_path(g: PDGraph, x: Iterable[NodeId], y: Iterable[NodeId]) -> bool:
    """Whether a proper semi-directed path from ``x`` to ``y`` starts with an undirected edge."""
    xs = g.check_nodes(x)
    ys = g.check_nodes(y)
    if xs & ys:
        raise GraphError(f"x and y overlap on {sorted_nodes(xs & ys)}")
    visited: Set[NodeId] = set()
    queue: Deque[NodeId] = deque()
    for start in sorted_nodes(xs):
        for n in sorted_nodes(g.neighbors_of(start)):
            if n not in xs and n not in visited:
                visited.add(n)
                queue.append(n)
    while queue:
        current = queue.popleft()
        if current in ys:
            return True
        for n in sorted_nodes(g.neighbors_of(current) | g.children_of(current)):
            if n not in xs and n not in visited:
                visited.add(n)
                queue.append(n)
    return False


_EDGE_PATTERN = re.compile(r"^(\S+?)\s*(->|--)\s*(\S+)$")


def parse_graph_document(text: str, source: str = "<string>") -> Tuple[PDGraph, FrozenSet[DirectedEdge]]:
    """Parse the graph text format into a graph and its ``require`` (background knowledge) edges."""
    nodes: List[NodeId] = []
    directed: List[DirectedEdge] = []
    undirected: List[Tuple[NodeId, NodeId]] = []
    background: List[DirectedEdge] = []
    slots: Dict[UndirectedEdge, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if len(line) == 0:
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "nodes":
            for n in rest.split():
                if n in nodes:
                    raise ParseError(f"node '{n}' declared twice", source, lineno)
                nodes.append(n)
            continue
        is_requirement = keyword == "require"
        m = _EDGE_PATTERN.match(rest.strip() if is_requirement else line)
        if m is None:
            raise ParseError(f"cannot parse statement '{line}'", source, lineno)
        u, kind, v = m.groups()
        for n in (u, v):
            if n not in nodes:
                raise ParseError(f"undeclared node '{n}'", source, lineno)
        if u == v:
            raise ParseError(f"self-loop on node '{u}'", source, lineno)
        if is_requirement:
            if kind != "->":
                raise ParseError("background knowledge must be a directed edge", source, lineno)
            if (v, u) in background:
                raise ParseError(f"background knowledge requires both {u}->{v} and {v}->{u}", source, lineno)
            if (u, v) not in background:
                background.append((u, v))
            continue
        slot = frozenset((u, v))
        if slot in slots:
            raise ParseError(f"duplicate edge between '{u}' and '{v}' (first on line {slots[slot]})", source, lineno)
        slots[slot] = lineno
        if kind == "->":
            directed.append((u, v))
        else:
            undirected.append((u, v))
    return PDGraph(nodes, directed, undirected), frozenset(background)


def parse_graph(text: str, source: str = "<string>") -> PDGraph:
    return parse_graph_document(text, source)[0]


def load_graph_document(path: Union[str, "os.PathLike[str]"]) -> Tuple[PDGraph, FrozenSet[DirectedEdge]]:
    with open(path, "r", encoding="utf-8") as fin:
        return parse_graph_document(fin.read(), source=os.fspath(path))


def dump_graph(g: PDGraph, background: Iterable[DirectedEdge] = ()) -> str:
    lines = ["nodes " + " ".join(g.nodes)]
    lines.extend(f"{u} -> {v}" for u, v in g.sorted_directed_edges())
    lines.extend(f"{u} -- {v}" for u, v in g.sorted_undirected_edges())
    lines.extend(f"require {u} -> {v}" for u, v in sorted(background))
    return "\n".join(lines) + "\n"
