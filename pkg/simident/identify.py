import sys
from typing import Any, Dict, List, Optional, Tuple, Union, overload

if sys.version_info >= (3, 9):
    from collections.abc import Iterable, Sequence
else:
    from typing import Iterable, Sequence

from .base import (
    GraphError,
    NodeId,
    NodeSet,
    NotIdentifiableError,
    UnknownNodeError,
    Verdict,
    format_nodes,
    sorted_nodes,
)
from .chain import EquivalenceVerdict, equivalent_or_node_mismatch
from .graph import (
    PDGraph,
    ancestors,
    chain_decomposition,
    exists_blocking_path,
    induced_subgraph,
    parents,
)
from .logger import logger
from .mpdag import GraphLike, SaMpdag, graph_of


class CandidateSet(Sequence[SaMpdag]):
    """Ordered, non-empty collection of SA-MPDAGs over one node set."""

    def __init__(self, graphs: Iterable[SaMpdag]):
        self._graphs = tuple(graphs)
        if len(self._graphs) == 0:
            raise GraphError("a candidate set needs at least one graph")
        first = self._graphs[0].node_set
        for i, g in enumerate(self._graphs[1:], start=2):
            if g.node_set != first:
                raise GraphError(
                    f"graph {i} is over {format_nodes(g.node_set)} but graph 1 is over {format_nodes(first)}"
                )

    @property
    def node_set(self) -> NodeSet:
        return self._graphs[0].node_set

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._graphs[0].nodes

    @overload
    def __getitem__(self, i: int) -> SaMpdag:
        ...

    @overload
    def __getitem__(self, i: slice) -> Sequence[SaMpdag]:
        ...

    def __getitem__(self, i: Union[int, slice]) -> Union[SaMpdag, Sequence[SaMpdag]]:
        return self._graphs[i]

    def __len__(self) -> int:
        return len(self._graphs)

    def __repr__(self) -> str:
        return f"CandidateSet({list(self._graphs)!r})"


class IdentQuery:
    """Treatment ``x`` and outcome ``y``: disjoint, non-empty node sets."""

    def __init__(self, x: Iterable[NodeId], y: Iterable[NodeId]):
        self._x = frozenset(x)
        self._y = frozenset(y)
        if len(self._x) == 0:
            raise GraphError("the treatment set x must not be empty")
        self._check_y()

    @classmethod
    def observational(cls, y: Iterable[NodeId]) -> "IdentQuery":
        """A query without treatment; its formula is a plain marginalisation."""
        query = cls.__new__(cls)
        query._x = frozenset()
        query._y = frozenset(y)
        query._check_y()
        return query

    def _check_y(self) -> None:
        if len(self._y) == 0:
            raise GraphError("the outcome set y must not be empty")
        if self._x & self._y:
            raise GraphError(f"x and y overlap on {format_nodes(self._x & self._y)}")

    @property
    def x(self) -> NodeSet:
        return self._x

    @property
    def y(self) -> NodeSet:
        return self._y

    def check_against(self, nodes: NodeSet) -> None:
        for n in sorted_nodes(self._x | self._y):
            if n not in nodes:
                raise UnknownNodeError(n)

    def to_dict(self) -> Dict[str, Any]:
        return {"x": list(sorted_nodes(self._x)), "y": list(sorted_nodes(self._y))}

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, IdentQuery):
            return self._x == __o._x and self._y == __o._y
        return False

    def __hash__(self) -> int:
        return hash((self._x, self._y))

    def __repr__(self) -> str:
        return f"IdentQuery(x={format_nodes(self._x)}, y={format_nodes(self._y)})"


class IdentFormula:
    """``sum over integrand of prod_j p(B_j | pa(B_j))`` with parents agreeing with the intervened values."""

    def __init__(
        self,
        source_graph_index: int,
        blocks: Sequence[Tuple[NodeSet, NodeSet]],
        integrand_vars: NodeSet,
        query: IdentQuery,
    ):
        self._source_graph_index = source_graph_index
        self._blocks = tuple((frozenset(b), frozenset(pa)) for b, pa in blocks)
        self._integrand_vars = frozenset(integrand_vars)
        self._query = query

    @property
    def source_graph_index(self) -> int:
        return self._source_graph_index

    @property
    def blocks(self) -> Tuple[Tuple[NodeSet, NodeSet], ...]:
        return self._blocks

    @property
    def integrand_vars(self) -> NodeSet:
        return self._integrand_vars

    @property
    def query(self) -> IdentQuery:
        return self._query

    @property
    def variables(self) -> NodeSet:
        """Every variable the formula reads from the observational density."""
        result = set(self._query.x)
        for b, pa in self._blocks:
            result |= b | pa
        return frozenset(result)

    def describe(self) -> str:
        terms = []
        for b, pa in self._blocks:
            if len(pa) == 0:
                terms.append(f"p({', '.join(sorted_nodes(b))})")
            else:
                terms.append(f"p({', '.join(sorted_nodes(b))} | {', '.join(sorted_nodes(pa))})")
        product = " * ".join(terms)
        if len(self._integrand_vars) == 0:
            return product
        return "sum_{" + ", ".join(sorted_nodes(self._integrand_vars)) + "} " + product

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source_graph_index": self._source_graph_index,
            "blocks": [{"nodes": list(sorted_nodes(b)), "parents": list(sorted_nodes(pa))} for b, pa in self._blocks],
            "integrand": list(sorted_nodes(self._integrand_vars)),
            "formula": self.describe(),
        }

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, IdentFormula):
            return (
                self._blocks == __o._blocks
                and self._integrand_vars == __o._integrand_vars
                and self._query == __o._query
            )
        return False

    def __hash__(self) -> int:
        return hash((self._blocks, self._integrand_vars, self._query))

    def __repr__(self) -> str:
        return f"IdentFormula({self.describe()!r}, source_graph_index={self._source_graph_index})"


class PairResult:
    """Condition 2a/2b outcome for graphs ``i < j``. ``condition2b`` is None when condition 1 fails for either."""

    def __init__(self, i: int, j: int, condition2a: bool, condition2b: Optional[EquivalenceVerdict]):
        self._i = i
        self._j = j
        self._condition2a = condition2a
        self._condition2b = condition2b

    @property
    def i(self) -> int:
        return self._i

    @property
    def j(self) -> int:
        return self._j

    @property
    def condition2a(self) -> bool:
        return self._condition2a

    @property
    def condition2b(self) -> Optional[bool]:
        return None if self._condition2b is None else self._condition2b.equivalent

    @property
    def rm_verdict(self) -> Optional[EquivalenceVerdict]:
        return self._condition2b

    @property
    def satisfied(self) -> bool:
        return self._condition2a or self.condition2b is True

    @property
    def conditions(self) -> Tuple[str, ...]:
        held = []
        if self._condition2a:
            held.append("2a")
        if self.condition2b:
            held.append("2b")
        return tuple(held)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pair": [self._i, self._j],
            "condition2a": self._condition2a,
            "condition2b": self.condition2b,
            "rm_verdict": None if self._condition2b is None else self._condition2b.to_dict(),
        }


class IdentReport:
    def __init__(
        self,
        query: IdentQuery,
        condition1: Sequence[bool],
        a_sets: Sequence[NodeSet],
        pairs: Sequence[PairResult],
        formulas: Sequence[Optional[IdentFormula]],
    ):
        self._query = query
        self._condition1 = tuple(condition1)
        self._a_sets = tuple(a_sets)
        self._pairs = tuple(pairs)
        self._formulas = tuple(formulas)

    @property
    def query(self) -> IdentQuery:
        return self._query

    @property
    def condition1(self) -> Tuple[bool, ...]:
        return self._condition1

    @property
    def a_sets(self) -> Tuple[NodeSet, ...]:
        return self._a_sets

    @property
    def pairs(self) -> Tuple[PairResult, ...]:
        return self._pairs

    @property
    def formulas(self) -> Tuple[Optional[IdentFormula], ...]:
        return self._formulas

    @property
    def failing_pairs(self) -> Tuple[PairResult, ...]:
        return tuple(p for p in self._pairs if not p.satisfied)

    @property
    def verdict(self) -> Verdict:
        if all(self._condition1) and len(self.failing_pairs) == 0:
            return Verdict.identifiable
        return Verdict.not_determined

    @property
    def identifiable(self) -> bool:
        return self.verdict == Verdict.identifiable

    @property
    def formula(self) -> Optional[IdentFormula]:
        return self._formulas[0] if self.identifiable else None

    def describe(self) -> str:
        lines = [f"query: x={format_nodes(self._query.x)} y={format_nodes(self._query.y)}"]
        for i, (c1, a) in enumerate(zip(self._condition1, self._a_sets)):
            lines.append(f"graph {i + 1}: condition 1 {'holds' if c1 else 'fails'}, A={format_nodes(a)}")
        for p in self._pairs:
            held = ", ".join(p.conditions) if p.satisfied else "neither"
            line = f"pair ({p.i + 1}, {p.j + 1}): {held}"
            if not p.satisfied and p.rm_verdict is not None:
                line += f" ({p.rm_verdict.describe()})"
            lines.append(line)
        lines.append(f"verdict: {self.verdict.value}")
        if self.formula is not None:
            lines.append(f"formula: {self.formula.describe()}")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "query": self._query.to_dict(),
            "condition1": list(self._condition1),
            "a_sets": [list(sorted_nodes(a)) for a in self._a_sets],
            "pairs": [p.to_dict() for p in self._pairs],
            "failing_pairs": [[p.i, p.j] for p in self.failing_pairs],
            "verdict": self.verdict.value,
            "formula": None if self.formula is None else self.formula.to_dict(),
            "formulas": [None if f is None else f.to_dict() for f in self._formulas],
        }


def a_set(g: GraphLike, q: IdentQuery) -> NodeSet:
    """Treatments that are ancestors of the outcome."""
    return q.x & ancestors(graph_of(g), q.y)


def rm(g: GraphLike, q: IdentQuery) -> PDGraph:
    """Drop the edges into intervened ancestors of ``y``, then keep the ancestral subgraph of ``y``."""
    graph = graph_of(g)
    q.check_against(graph.node_set)
    a = a_set(graph, q)
    cut = PDGraph(graph.nodes, (e for e in graph.directed_edges if e[1] not in a), graph.undirected_edges)
    return induced_subgraph(cut, ancestors(cut, q.y))


def check_condition1(g: GraphLike, q: IdentQuery) -> bool:
    return not exists_blocking_path(graph_of(g), q.x, q.y)


def check_condition2a(gi: GraphLike, gj: GraphLike, q: IdentQuery) -> bool:
    for g, h in ((graph_of(gi), graph_of(gj)), (graph_of(gj), graph_of(gi))):
        for block in chain_decomposition(g, a_set(g, q)):
            if parents(g, block) != parents(h, block):
                logger.debug(
                    f"condition 2a fails on block {format_nodes(block)}: "
                    f"{format_nodes(parents(g, block))} != {format_nodes(parents(h, block))}"
                )
                return False
    return True


def condition2b_verdict(gi: GraphLike, gj: GraphLike, q: IdentQuery) -> EquivalenceVerdict:
    for g in (gi, gj):
        if not check_condition1(g, q):
            raise NotIdentifiableError(
                f"condition 2b needs condition 1, which fails for x={format_nodes(q.x)} y={format_nodes(q.y)}"
            )
    return equivalent_or_node_mismatch(rm(gi, q), rm(gj, q))


def check_condition2b(gi: GraphLike, gj: GraphLike, q: IdentQuery) -> bool:
    return condition2b_verdict(gi, gj, q).equivalent


def build_formula(g: GraphLike, q: IdentQuery, source_graph_index: int = 0) -> IdentFormula:
    graph = graph_of(g)
    q.check_against(graph.node_set)
    if not check_condition1(graph, q):
        raise NotIdentifiableError(
            f"a proper semi-directed path from {format_nodes(q.x)} to {format_nodes(q.y)} "
            "starts with an undirected edge"
        )
    remaining = induced_subgraph(graph, graph.node_set - q.x)
    relevant = ancestors(remaining, q.y)
    blocks = [(block, parents(graph, block)) for block in chain_decomposition(graph, relevant)]
    return IdentFormula(source_graph_index, blocks, relevant - q.y, q)


def simultaneous_identify(gs: CandidateSet, q: IdentQuery) -> IdentReport:
    q.check_against(gs.node_set)
    condition1 = [check_condition1(g, q) for g in gs]
    a_sets = [a_set(g, q) for g in gs]
    pairs: List[PairResult] = []
    for i in range(len(gs)):
        for j in range(i + 1, len(gs)):
            c2a = check_condition2a(gs[i], gs[j], q)
            c2b = condition2b_verdict(gs[i], gs[j], q) if condition1[i] and condition1[j] else None
            pair = PairResult(i, j, c2a, c2b)
            logger.debug(f"pair ({i + 1}, {j + 1}): 2a={pair.condition2a} 2b={pair.condition2b}")
            pairs.append(pair)
    formulas = [build_formula(g, q, i) if c1 else None for i, (g, c1) in enumerate(zip(gs, condition1))]
    report = IdentReport(q, condition1, a_sets, pairs, formulas)
    logger.info(f"{q!r} over {len(gs)} graph(s): {report.verdict.value}")
    return report
