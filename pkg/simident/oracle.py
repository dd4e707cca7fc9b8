import itertools
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

if sys.version_info >= (3, 9):
    from collections.abc import Iterator, Mapping, Sequence
else:
    from typing import Iterator, Mapping, Sequence

import networkx as nx
import numpy as np

from .base import (
    DEFAULT_TOLERANCE,
    MAX_SEARCH_NODES,
    DistributionError,
    EnumerationLimitError,
    IncompatibleDensityError,
    NodeId,
    NumericMode,
    PreconditionError,
    format_nodes,
)
from .chain import equivalent
from .density import (
    Assignment,
    DiscreteDistribution,
    InterventionalMarginal,
    VariableSpec,
    evaluate_formula,
    is_markov_to_dag,
    markov_violation,
    resolve_assignment,
    truncated_factorization,
)
from .factory import CandidateSetFactory, DensityFactory, QueryFactory
from .graph import PDGraph
from .identify import CandidateSet, IdentQuery, simultaneous_identify
from .logger import logger
from .mpdag import SaMpdag, cpdag_of, enumerate_extensions, sa_mpdag_from_text

EXAMPLE1_GRAPH_TEXTS = {
    "example1_g1.pdg": "nodes 1 2 3 4\n1 -> 4\n2 -> 4\n3 -> 4\n1 -- 2\n",
    "example1_g2.pdg": "nodes 1 2 3 4\n1 -> 2\n1 -> 4\n3 -> 4\n4 -> 2\n",
}

EXAMPLE2_GRAPH_TEXTS = {
    "example2_g1.pdg": (
        "nodes 1 2 3 4 5\n1 -> 4\n1 -> 5\n3 -> 4\n4 -> 5\n1 -- 2\n2 -- 3\nrequire 1 -> 4\nrequire 4 -> 5\n"
    ),
    "example2_g2.pdg": "nodes 1 2 3 4 5\n1 -> 2\n1 -> 4\n1 -> 5\n3 -> 2\n4 -> 5\nrequire 1 -> 4\nrequire 4 -> 5\n",
}


class OracleWitness:
    """Two represented DAGs whose interventional marginals differ at ``assignment``."""

    def __init__(self, i: int, j: int, assignment: Assignment, magnitude: float):
        self._i = i
        self._j = j
        self._assignment = assignment
        self._magnitude = magnitude

    @property
    def i(self) -> int:
        return self._i

    @property
    def j(self) -> int:
        return self._j

    @property
    def assignment(self) -> Assignment:
        return self._assignment

    @property
    def magnitude(self) -> float:
        return self._magnitude

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dags": [self._i, self._j],
            "assignment": {n: s for n, s in self._assignment},
            "magnitude": self._magnitude,
        }


class OracleVerdict:
    def __init__(
        self,
        dags: Sequence[PDGraph],
        marginals: Sequence[InterventionalMarginal],
        witness: Optional[OracleWitness] = None,
    ):
        self._dags = tuple(dags)
        self._marginals = tuple(marginals)
        self._witness = witness

    @property
    def all_agree(self) -> bool:
        return self._witness is None

    @property
    def dags(self) -> Tuple[PDGraph, ...]:
        return self._dags

    @property
    def marginals(self) -> Tuple[InterventionalMarginal, ...]:
        return self._marginals

    @property
    def witness(self) -> Optional[OracleWitness]:
        return self._witness

    def describe(self) -> str:
        lines = [f"{len(self._dags)} represented DAG(s)"]
        if self._witness is None:
            lines.append("all interventional marginals agree")
            if len(self._marginals) > 0:
                lines.append(self._marginals[0].describe())
        else:
            w = self._witness
            state = ", ".join(f"{n}={s}" for n, s in w.assignment)
            lines.append(f"DAGs {w.i + 1} and {w.j + 1} disagree at {state} by {w.magnitude:.6g}")
            lines.append(f"DAG {w.i + 1}: {self._dags[w.i]!r}")
            lines.append(f"DAG {w.j + 1}: {self._dags[w.j]!r}")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "all_agree": self.all_agree,
            "dags": [{"directed": [list(e) for e in d.sorted_directed_edges()]} for d in self._dags],
            "marginals": [m.to_dict() for m in self._marginals],
            "witness": None if self._witness is None else self._witness.to_dict(),
        }


def _check_compatible(gs: CandidateSet, p: DiscreteDistribution, tolerance: float) -> List[List[PDGraph]]:
    extensions = []
    for index, g in enumerate(gs):
        dags = enumerate_extensions(g)
        violation = markov_violation(p, dags[0], tolerance)
        if violation is not None:
            node, row = violation
            state = ", ".join(f"{n}={s}" for n, s in row)
            raise IncompatibleDensityError(
                f"the density is not compatible with graph {index + 1}: "
                f"local Markov condition of {node} fails at {state}",
                index,
                violation,
            )
        extensions.append(dags)
    return extensions


def brute_force_check(
    gs: CandidateSet,
    p: DiscreteDistribution,
    q: IdentQuery,
    x_assignment: Mapping[NodeId, Union[int, str]],
    tolerance: float = DEFAULT_TOLERANCE,
) -> OracleVerdict:
    """Compare the interventional marginals of every DAG the candidate set represents."""
    q.check_against(gs.node_set)
    fixed = resolve_assignment(p, x_assignment)
    if set(fixed) != set(q.x):
        raise DistributionError(f"the intervention must set exactly {format_nodes(q.x)}, got {format_nodes(fixed)}")
    unique: Dict[Tuple[Any, ...], PDGraph] = {}
    for dags in _check_compatible(gs, p, tolerance):
        for d in dags:
            unique.setdefault(d.canonical_key(), d)
    dags = [unique[k] for k in sorted(unique)]
    marginals = [truncated_factorization(p, d, fixed).marginal(q.y) for d in dags]
    witness = None
    for k in range(1, len(marginals)):
        diff = marginals[0].first_difference(marginals[k], tolerance)
        if diff is not None:
            witness = OracleWitness(0, k, diff[0], diff[1])
            break
    verdict = OracleVerdict(dags, marginals, witness)
    logger.info(f"oracle over {len(dags)} DAG(s): {'agree' if verdict.all_agree else 'disagree'}")
    return verdict


def _bits(index: int, width: int) -> str:
    return format(index, f"0{width}b")


def example1_distribution() -> DiscreteDistribution:
    """The joint distribution of four tuple-valued variables driven by nine fair coins.

    Variables ``1``, ``2`` and ``3`` are three-bit tuples, ``4`` is ``(s1, s2, b, e)`` with ``s1, s2``
    in ``{0, 1, 2}``; labels spell the tuples out.
    """
    variables = [VariableSpec(n, 8, [_bits(i, 3) for i in range(8)]) for n in ("1", "2", "3")]
    labels4 = [f"{s1}{s2}{b}{e}" for s1 in range(3) for s2 in range(3) for b in range(2) for e in range(2)]
    variables.append(VariableSpec("4", 36, labels4))
    counts: Dict[Tuple[int, ...], int] = {}
    for phi1, phi2, phi3, phi4, phi5, e1, e2, e3, e4 in itertools.product((0, 1), repeat=9):
        x1 = (phi1, phi2, e1)
        x2 = (x1[0], phi3, e2)
        x3 = (phi4, phi5, e3)
        x4 = (x1[0] + x3[0], x2[0] + x3[1], x2[1], e4)
        state = (
            x1[0] * 4 + x1[1] * 2 + x1[2],
            x2[0] * 4 + x2[1] * 2 + x2[2],
            x3[0] * 4 + x3[1] * 2 + x3[2],
            ((x4[0] * 3 + x4[1]) * 2 + x4[2]) * 2 + x4[3],
        )
        counts[state] = counts.get(state, 0) + 1
    return DiscreteDistribution.from_mapping(variables, {s: Fraction(c, 512) for s, c in counts.items()})


def example1_graphs() -> Tuple[SaMpdag, SaMpdag]:
    g1, g2 = (sa_mpdag_from_text(text, name) for name, text in EXAMPLE1_GRAPH_TEXTS.items())
    return g1, g2


def example2_graphs() -> Tuple[SaMpdag, SaMpdag]:
    g1, g2 = (sa_mpdag_from_text(text, name) for name, text in EXAMPLE2_GRAPH_TEXTS.items())
    return g1, g2


def enumerate_dags(nodes: Sequence[NodeId], edge_count: Optional[int] = None) -> Iterator[PDGraph]:
    """Every labelled DAG over ``nodes``, by increasing edge count (only ``edge_count`` edges if given)."""
    pairs = list(itertools.combinations(sorted(nodes), 2))
    counts = range(len(pairs) + 1) if edge_count is None else [edge_count]
    for k in counts:
        for chosen in itertools.combinations(pairs, k):
            for flips in itertools.product((False, True), repeat=k):
                edges = [(v, u) if flip else (u, v) for (u, v), flip in zip(chosen, flips)]
                dg: "nx.DiGraph[NodeId]" = nx.DiGraph(edges)
                if nx.is_directed_acyclic_graph(dg):
                    yield PDGraph(nodes, edges)


def sparsest_cpdag_search(
    p: DiscreteDistribution, nodes: Optional[Sequence[NodeId]] = None, tolerance: float = DEFAULT_TOLERANCE
) -> List[PDGraph]:
    """CPDAGs of the DAGs with the fewest edges to which ``p`` is Markov."""
    names = tuple(p.names if nodes is None else nodes)
    if set(names) != set(p.names):
        raise DistributionError(f"nodes {format_nodes(names)} do not match variables {format_nodes(p.names)}")
    if len(names) > MAX_SEARCH_NODES:
        raise EnumerationLimitError(f"exhaustive search is limited to {MAX_SEARCH_NODES} nodes, got {len(names)}")
    for k in range(len(names) * (len(names) - 1) // 2 + 1):
        survivors = [d for d in enumerate_dags(names, k) if is_markov_to_dag(p, d, tolerance)]
        if len(survivors) > 0:
            cpdags = {c.canonical_key(): c for c in (cpdag_of(d) for d in survivors)}
            logger.info(f"{len(survivors)} Markovian DAG(s) with {k} edges, {len(cpdags)} class(es)")
            return [cpdags[key] for key in sorted(cpdags)]
    raise AssertionError("the complete DAGs are Markov to every density")


def _x_grid(p: DiscreteDistribution, x: Sequence[NodeId]) -> Iterator[Dict[NodeId, int]]:
    for states in itertools.product(*(range(p.spec(n).cardinality) for n in x)):
        yield dict(zip(x, states))


def counterexample_search(
    gs: CandidateSet,
    q: IdentQuery,
    arity: int = 2,
    trials: int = 100,
    seed: int = 0,
    mode: NumericMode = NumericMode.exact,
    tolerance: float = DEFAULT_TOLERANCE,
) -> Optional[Tuple[DiscreteDistribution, OracleVerdict]]:
    """Random densities compatible with every graph, checked by the oracle on every intervention value."""
    if simultaneous_identify(gs, q).identifiable:
        raise PreconditionError("the candidate set passes the identification criterion; no counterexample exists")
    densities = DensityFactory(gs[0], arity, mode, seed=seed)
    x = sorted(q.x)
    for trial in range(trials):
        p = densities.create()
        if not all(is_markov_to_dag(p, enumerate_extensions(g)[0], tolerance) for g in gs):
            logger.debug(f"trial {trial}: density is not compatible with every graph")
            continue
        for assignment in _x_grid(p, x):
            verdict = brute_force_check(gs, p, q, assignment, tolerance)
            if not verdict.all_agree:
                logger.info(f"counterexample found in trial {trial} at {assignment}")
                return p, verdict
    logger.info(f"no counterexample in {trials} trial(s) with seed {seed}")
    return None


class AuditFailure:
    def __init__(self, candidate_set: CandidateSet, query: IdentQuery, x_assignment: Mapping[NodeId, int], reason: str):
        self._candidate_set = candidate_set
        self._query = query
        self._x_assignment = dict(x_assignment)
        self._reason = reason

    @property
    def candidate_set(self) -> CandidateSet:
        return self._candidate_set

    @property
    def query(self) -> IdentQuery:
        return self._query

    @property
    def reason(self) -> str:
        return self._reason

    def to_dict(self) -> Dict[str, Any]:
        return {
            "graphs": [
                {
                    "directed": [list(e) for e in g.graph.sorted_directed_edges()],
                    "undirected": [list(e) for e in g.graph.sorted_undirected_edges()],
                }
                for g in self._candidate_set
            ],
            "query": self._query.to_dict(),
            "x": self._x_assignment,
            "reason": self._reason,
        }


class AuditReport:
    def __init__(self, seed: int, attempts: int, sets: int, densities: int, failures: Sequence[AuditFailure]):
        self._seed = seed
        self._attempts = attempts
        self._sets = sets
        self._densities = densities
        self._failures = tuple(failures)

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def attempts(self) -> int:
        return self._attempts

    @property
    def sets(self) -> int:
        return self._sets

    @property
    def densities(self) -> int:
        return self._densities

    @property
    def failures(self) -> Tuple[AuditFailure, ...]:
        return self._failures

    @property
    def passed(self) -> bool:
        return len(self._failures) == 0

    def describe(self) -> str:
        lines = [
            f"seed {self._seed}: {self._sets} identifiable candidate set(s) from {self._attempts} draw(s), "
            f"{self._densities} density check(s)",
            f"failures: {len(self._failures)}",
        ]
        lines.extend(f"  {f.query!r}: {f.reason}" for f in self._failures)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self._seed,
            "attempts": self._attempts,
            "sets": self._sets,
            "densities": self._densities,
            "passed": self.passed,
            "failures": [f.to_dict() for f in self._failures],
        }


def soundness_audit(
    factory: CandidateSetFactory,
    densities: int = 100,
    seed: int = 0,
    sets: int = 50,
    arity: int = 2,
    mode: NumericMode = NumericMode.float,
    tolerance: float = DEFAULT_TOLERANCE,
    max_attempts: Optional[int] = None,
) -> AuditReport:
    """Draw candidate sets until ``sets`` of them are declared identifiable and check each with the oracle.

    Every identifiable set is checked on ``densities`` densities drawn from its base DAG; both the oracle
    and every graph's formula must agree.
    """
    rng = np.random.default_rng(seed)
    queries = QueryFactory(factory.nodes, rng=rng)
    limit = sets * 50 if max_attempts is None else max_attempts
    failures: List[AuditFailure] = []
    attempts = found = checked = 0
    while found < sets and attempts < limit:
        attempts += 1
        gs, base = factory.create_with_base()
        q = queries.create()
        report = simultaneous_identify(gs, q)
        if not report.identifiable:
            continue
        found += 1
        draws = DensityFactory(base, arity, mode, rng=rng)
        x = sorted(q.x)
        for _ in range(densities):
            p = draws.create()
            assignment = {n: int(rng.integers(0, arity)) for n in x}
            checked += 1
            verdict = brute_force_check(gs, p, q, assignment, tolerance)
            if not verdict.all_agree:
                failures.append(AuditFailure(gs, q, assignment, "represented DAGs disagree"))
                logger.error(f"soundness failure for {q!r}: {verdict.describe()}")
                continue
            for formula in report.formulas:
                if formula is None:
                    continue
                value = evaluate_formula(formula, p, assignment)
                if verdict.marginals[0].first_difference(value, tolerance) is not None:
                    failures.append(
                        AuditFailure(gs, q, assignment, f"formula of graph {formula.source_graph_index + 1} disagrees")
                    )
                    logger.error(f"formula mismatch for {q!r} on graph {formula.source_graph_index + 1}")
    if found < sets:
        logger.warning(f"only {found} identifiable candidate set(s) in {attempts} draw(s)")
    return AuditReport(seed, attempts, found, checked, failures)


def pairwise_non_equivalent(cpdags: Sequence[PDGraph]) -> bool:
    """Whether no two of ``cpdags`` are Markov equivalent."""
    return all(not equivalent(a, b).equivalent for a, b in itertools.combinations(cpdags, 2))
