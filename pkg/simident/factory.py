import sys
from abc import ABCMeta, abstractmethod
from fractions import Fraction
from typing import Any, Generic, List, Optional, Tuple, TypeVar

if sys.version_info >= (3, 9):
    from collections.abc import Sequence
else:
    from typing import Sequence

import networkx as nx
import numpy as np

from .base import GraphError, NodeId, NotSaMpdagError, NumericMode, OrientationConflictError
from .density import DiscreteDistribution, VariableSpec
from .graph import PDGraph, is_dag
from .identify import CandidateSet, IdentQuery
from .logger import logger
from .mpdag import BackgroundKnowledge, GraphLike, SaMpdag, cpdag_of, enumerate_extensions, graph_of, meek_close

T = TypeVar("T")

MAX_ATTEMPTS = 100


class FactoryBase(Generic[T], metaclass=ABCMeta):
    """Seeded generator of random objects; factories built from one another share a ``numpy`` generator."""

    def __init__(self, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        self._seed = seed
        self._rng = np.random.default_rng(seed) if rng is None else rng

    @property
    def seed(self) -> Optional[int]:
        return self._seed

    @property
    def rng(self) -> np.random.Generator:
        return self._rng

    @abstractmethod
    def create(self) -> T:
        ...

    def __call__(self) -> T:
        return self.create()


class DagFactory(FactoryBase[PDGraph]):
    def __init__(
        self,
        nodes: Sequence[NodeId],
        edge_probability: float = 0.5,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        super(DagFactory, self).__init__(seed, rng)
        if not 0.0 <= edge_probability <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {edge_probability}")
        self._nodes = tuple(nodes)
        self._edge_probability = edge_probability

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._nodes

    def create(self) -> PDGraph:
        order = [self._nodes[i] for i in self.rng.permutation(len(self._nodes))]
        edges = [
            (u, v)
            for i, u in enumerate(order)
            for v in order[i + 1 :]
            if self.rng.random() < self._edge_probability
        ]
        return PDGraph(self._nodes, edges)

    def supergraph(self, dag: PDGraph, edge_probability: Optional[float] = None) -> PDGraph:
        """``dag`` plus random extra edges that respect one of its topological orders."""
        probability = self._edge_probability if edge_probability is None else edge_probability
        order = list(nx.topological_sort(dag.directed_graph()))
        edges = set(dag.directed_edges)
        for i, u in enumerate(order):
            for v in order[i + 1 :]:
                if not dag.is_adjacent(u, v) and self.rng.random() < probability:
                    edges.add((u, v))
        return PDGraph(dag.nodes, edges)


class SaMpdagFactory(FactoryBase[SaMpdag]):
    """Random DAG, its CPDAG, then optionally background knowledge drawn from the DAG's own orientations."""

    def __init__(
        self,
        nodes: Sequence[NodeId],
        edge_probability: float = 0.5,
        background_probability: float = 0.0,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        super(SaMpdagFactory, self).__init__(seed, rng)
        self._dags = DagFactory(nodes, edge_probability, rng=self.rng)
        self._background_probability = background_probability

    @property
    def dags(self) -> DagFactory:
        return self._dags

    def refine(self, dag: PDGraph) -> SaMpdag:
        """An SA-MPDAG representing ``dag``."""
        cpdag = cpdag_of(dag)
        if self._background_probability <= 0.0:
            return SaMpdag(cpdag)
        candidates = [e for e in dag.sorted_directed_edges() if cpdag.has_undirected(*e)]
        for _ in range(MAX_ATTEMPTS):
            chosen = [e for e in candidates if self.rng.random() < self._background_probability]
            if len(chosen) == 0:
                return SaMpdag(cpdag)
            bk = BackgroundKnowledge(chosen)
            try:
                return SaMpdag(meek_close(cpdag, bk), provenance=bk)
            except (NotSaMpdagError, OrientationConflictError) as e:
                logger.debug(f"rejected background knowledge {bk!r}: {e}")
        return SaMpdag(cpdag)

    def create_with_dag(self) -> Tuple[SaMpdag, PDGraph]:
        dag = self._dags.create()
        return self.refine(dag), dag

    def create(self) -> SaMpdag:
        return self.create_with_dag()[0]


class DensityFactory(FactoryBase[DiscreteDistribution]):
    """Random density Markov to ``graph`` (to its first consistent extension when it is not a DAG).

    Float mode draws each conditional row from a symmetric Dirichlet prior; exact mode normalises random
    positive integer weights.
    """

    def __init__(
        self,
        graph: GraphLike,
        arity: int = 2,
        mode: NumericMode = NumericMode.float,
        concentration: float = 1.0,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        super(DensityFactory, self).__init__(seed, rng)
        if arity < 1:
            raise ValueError(f"arity must be positive, got {arity}")
        g = graph_of(graph)
        self._dag = g if is_dag(g) else enumerate_extensions(graph if isinstance(graph, SaMpdag) else SaMpdag(g))[0]
        self._arity = arity
        self._mode = NumericMode(mode)
        self._concentration = concentration

    @property
    def dag(self) -> PDGraph:
        return self._dag

    @property
    def mode(self) -> NumericMode:
        return self._mode

    def _row_weights(self, rows: int) -> Any:
        if self._mode == NumericMode.float:
            return self.rng.dirichlet(np.full(self._arity, self._concentration), size=rows)
        weights = self.rng.integers(1, 10, size=(rows, self._arity))
        return np.array(
            [[Fraction(int(w), int(sum(row))) for w in row] for row in weights], dtype=object
        ).reshape(rows, self._arity)

    def create(self) -> DiscreteDistribution:
        nodes = self._dag.nodes
        dtype: Any = object if self._mode == NumericMode.exact else np.float64
        joint = np.ones([1] * len(nodes), dtype=dtype)
        if self._mode == NumericMode.exact:
            joint[...] = Fraction(1)
        for v in nodes:
            scope = [n for n in nodes if n in self._dag.parents_of(v) or n == v]
            parent_count = len(scope) - 1
            rows = self._row_weights(self._arity**parent_count)
            cpt = rows.reshape([self._arity] * parent_count + [self._arity])
            cpt = np.moveaxis(cpt, -1, scope.index(v))
            joint = joint * cpt.reshape([self._arity if n in scope else 1 for n in nodes])
        variables = [VariableSpec(n, self._arity) for n in nodes]
        return DiscreteDistribution(variables, joint, self._mode)


class QueryFactory(FactoryBase[IdentQuery]):
    """Random disjoint, non-empty treatment and outcome sets of at most ``max_size`` nodes each."""

    def __init__(
        self,
        nodes: Sequence[NodeId],
        max_size: int = 2,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        super(QueryFactory, self).__init__(seed, rng)
        if len(nodes) < 2:
            raise GraphError("a query needs at least two nodes")
        self._nodes = tuple(nodes)
        self._max_size = max_size

    def create(self) -> IdentQuery:
        shuffled = [self._nodes[i] for i in self.rng.permutation(len(self._nodes))]
        nx_ = int(self.rng.integers(1, min(self._max_size, len(shuffled) - 1) + 1))
        ny = int(self.rng.integers(1, min(self._max_size, len(shuffled) - nx_) + 1))
        return IdentQuery(shuffled[:nx_], shuffled[nx_ : nx_ + ny])


class CandidateSetFactory(FactoryBase[CandidateSet]):
    """Candidate sets whose graphs all admit a common compatible density.

    A base DAG is drawn, each member is the SA-MPDAG of a random super-DAG of it in one topological
    order, so every density Markov to the base DAG is compatible with every member.
    """

    def __init__(
        self,
        nodes: Sequence[NodeId],
        size: Tuple[int, int] = (2, 3),
        edge_probability: float = 0.4,
        extra_edge_probability: float = 0.3,
        background_probability: float = 0.3,
        seed: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        super(CandidateSetFactory, self).__init__(seed, rng)
        if not 1 <= size[0] <= size[1]:
            raise ValueError(f"invalid candidate set size range {size}")
        self._nodes = tuple(nodes)
        self._size = size
        self._extra_edge_probability = extra_edge_probability
        self._graphs = SaMpdagFactory(nodes, edge_probability, background_probability, rng=self.rng)

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return self._nodes

    def create_with_base(self) -> Tuple[CandidateSet, PDGraph]:
        base = self._graphs.dags.create()
        count = int(self.rng.integers(self._size[0], self._size[1] + 1))
        members: List[SaMpdag] = [self._graphs.refine(base)]
        for _ in range(count - 1):
            members.append(self._graphs.refine(self._graphs.dags.supergraph(base, self._extra_edge_probability)))
        return CandidateSet(members), base

    def create(self) -> CandidateSet:
        return self.create_with_base()[0]

