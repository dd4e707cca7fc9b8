import sys
from enum import Enum
from typing import Any, FrozenSet, Optional, Sequence, Tuple

if sys.version_info >= (3, 9):
    from collections.abc import Iterable
else:
    from typing import Iterable

NodeId = str
NodeSet = FrozenSet[NodeId]
DirectedEdge = Tuple[NodeId, NodeId]
UndirectedEdge = FrozenSet[NodeId]

DEFAULT_TOLERANCE = 1e-9
NORMALISATION_TOLERANCE = 1e-12
MAX_STATES = 10**6
DEFAULT_EXTENSION_LIMIT = 4096
MAX_SEARCH_NODES = 5


class NumericMode(str, Enum):
    exact = "exact"
    float = "float"


class OutputFormat(str, Enum):
    text = "text"
    json = "json"


class Verdict(str, Enum):
    identifiable = "identifiable"
    not_determined = "not-determined"


def node_set(nodes: Iterable[NodeId]) -> NodeSet:
    return frozenset(nodes)


def sorted_nodes(nodes: Iterable[NodeId]) -> Tuple[NodeId, ...]:
    return tuple(sorted(nodes))


def format_nodes(nodes: Iterable[NodeId]) -> str:
    return "{" + ", ".join(sorted_nodes(nodes)) + "}"


class SimidentError(Exception):
    ...


class GraphError(SimidentError, ValueError):
    ...


class UnknownNodeError(GraphError):
    def __init__(self, node: NodeId) -> None:
        super(UnknownNodeError, self).__init__(f"unknown node '{node}'")
        self.node = node


class SemiDirectedCycleError(GraphError):
    def __init__(self, cycle: Sequence[NodeId]) -> None:
        super(SemiDirectedCycleError, self).__init__(f"semi-directed cycle: {' ~ '.join(cycle)} ~ {cycle[0]}")
        self.cycle = tuple(cycle)


class NotSaMpdagError(GraphError):
    def __init__(self, message: str, witness: Tuple[NodeId, ...]) -> None:
        super(NotSaMpdagError, self).__init__(message)
        self.witness = witness


class OrientationConflictError(GraphError):
    def __init__(self, message: str, edge: Optional[DirectedEdge] = None) -> None:
        super(OrientationConflictError, self).__init__(message)
        self.edge = edge


class EnumerationLimitError(SimidentError):
    ...


class NotIdentifiableError(SimidentError):
    ...


class UndefinedRowError(SimidentError):
    def __init__(self, message: str, node_set: NodeSet, row: Tuple[Tuple[NodeId, int], ...]) -> None:
        super(UndefinedRowError, self).__init__(message)
        self.node_set = node_set
        self.row = row


class DistributionError(SimidentError, ValueError):
    ...


class IncompatibleDensityError(SimidentError):
    def __init__(self, message: str, graph_index: int, witness: Any = None) -> None:
        super(IncompatibleDensityError, self).__init__(message)
        self.graph_index = graph_index
        self.witness = witness


class ParseError(SimidentError, ValueError):
    def __init__(self, message: str, source: str = "<string>", lineno: int = 0) -> None:
        super(ParseError, self).__init__(f"{source}:{lineno}: {message}")
        self.source = source
        self.lineno = lineno


class UsageError(SimidentError):
    ...


class PreconditionError(SimidentError):
    ...
