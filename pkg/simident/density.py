import math
import os
import sys
from fractions import Fraction
from functools import reduce
from typing import Any, Dict, FrozenSet, List, Optional, Tuple, Union

if sys.version_info >= (3, 9):
    from collections.abc import Iterable, Mapping, Sequence
else:
    from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from .base import (
    DEFAULT_TOLERANCE,
    MAX_STATES,
    NORMALISATION_TOLERANCE,
    DistributionError,
    GraphError,
    NodeId,
    NodeSet,
    NotIdentifiableError,
    NumericMode,
    ParseError,
    UndefinedRowError,
    format_nodes,
)
from .graph import PDGraph, chain_decomposition, is_dag, parents
from .identify import IdentFormula, IdentQuery, a_set, check_condition1
from .logger import logger
from .mpdag import GraphLike, SaMpdag, enumerate_extensions, graph_of

Table = NDArray[Any]
Scalar = Union[Fraction, float]
Assignment = Tuple[Tuple[NodeId, int], ...]


class VariableSpec:
    """A finite variable with ``cardinality`` states and optional state labels."""

    def __init__(self, name: NodeId, cardinality: int, labels: Optional[Sequence[str]] = None):
        if cardinality < 1:
            raise DistributionError(f"variable '{name}' needs at least one state, got {cardinality}")
        if labels is not None and len(labels) != cardinality:
            raise DistributionError(f"variable '{name}' has {cardinality} states but {len(labels)} labels")
        if labels is not None and len(set(labels)) != len(labels):
            raise DistributionError(f"variable '{name}' has duplicate state labels")
        self._name = name
        self._cardinality = cardinality
        self._labels = None if labels is None else tuple(labels)

    @property
    def name(self) -> NodeId:
        return self._name

    @property
    def cardinality(self) -> int:
        return self._cardinality

    @property
    def labels(self) -> Optional[Tuple[str, ...]]:
        return self._labels

    def label(self, state: int) -> str:
        return str(state) if self._labels is None else self._labels[state]

    def state_index(self, token: Union[str, int]) -> int:
        """Resolve a state given by label or by index."""
        if isinstance(token, str) and self._labels is not None and token in self._labels:
            return self._labels.index(token)
        try:
            state = int(token)
        except ValueError:
            raise DistributionError(f"'{token}' is not a state of variable '{self._name}'")
        if not 0 <= state < self._cardinality:
            raise DistributionError(f"state {state} is out of range for variable '{self._name}'")
        return state

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, VariableSpec):
            return (self._name, self._cardinality, self._labels) == (__o._name, __o._cardinality, __o._labels)
        return False

    def __hash__(self) -> int:
        return hash((self._name, self._cardinality, self._labels))

    def __repr__(self) -> str:
        return f"VariableSpec({self._name!r}, {self._cardinality})"


def _zero(mode: NumericMode) -> Scalar:
    return Fraction(0) if mode == NumericMode.exact else 0.0


def _one(mode: NumericMode) -> Scalar:
    return Fraction(1) if mode == NumericMode.exact else 1.0


def _coerce(table: Any, mode: NumericMode) -> Table:
    if mode == NumericMode.float:
        return np.array(table, dtype=np.float64)
    raw = np.asarray(table, dtype=object)
    return np.array([Fraction(v) for v in raw.ravel()], dtype=object).reshape(raw.shape)


def _sum_keep(table: Table, names: Sequence[NodeId], keep: Iterable[NodeId], keepdims: bool = False) -> Table:
    kept = set(keep)
    axes = tuple(i for i, n in enumerate(names) if n not in kept)
    if len(axes) == 0:
        return table
    return np.asarray(np.sum(table, axis=axes, keepdims=keepdims), dtype=table.dtype)


def _align(table: Table, names: Sequence[NodeId], fixed: Mapping[NodeId, int], keep: Sequence[NodeId]) -> Table:
    """Slice ``fixed`` values out of ``table`` and reshape it to broadcast over ``keep``.

    ``names`` and ``keep`` follow the same variable order.
    """
    index: List[Union[int, slice]] = []
    remaining: List[NodeId] = []
    for axis, n in enumerate(names):
        if n in fixed:
            index.append(fixed[n] if table.shape[axis] > 1 else 0)
        else:
            index.append(slice(None))
            remaining.append(n)
    for n in remaining:
        if n not in keep:
            raise GraphError(f"variable '{n}' is neither fixed nor kept")
    sliced = np.asarray(table[tuple(index)], dtype=table.dtype)
    sizes = dict(zip(remaining, sliced.shape))
    return np.reshape(sliced, [sizes.get(n, 1) for n in keep])


class DiscreteDistribution:
    """Joint probability table over finite variables, stored densely in variable order (last variable fastest).

    In exact mode entries are :class:`fractions.Fraction` and must sum to exactly 1; in float mode they
    must sum to 1 within ``tolerance``.
    """

    def __init__(
        self,
        variables: Sequence[VariableSpec],
        table: Any,
        mode: NumericMode = NumericMode.exact,
        tolerance: float = NORMALISATION_TOLERANCE,
    ):
        self._variables = tuple(variables)
        self._names = tuple(v.name for v in self._variables)
        if len(set(self._names)) != len(self._names):
            raise DistributionError(f"duplicate variable names in {list(self._names)}")
        self._mode = NumericMode(mode)
        shape = tuple(v.cardinality for v in self._variables)
        size = math.prod(shape)
        if size > MAX_STATES:
            raise DistributionError(f"{size} joint states exceed the limit of {MAX_STATES}")
        values = _coerce(table, self._mode)
        if values.size != size:
            raise DistributionError(f"table has {values.size} entries but the variables need {size}")
        values = values.reshape(shape)
        if any(v < 0 for v in values.ravel()):
            raise DistributionError("probabilities must be non-negative")
        total = sum(values.ravel(), _zero(self._mode))
        if self._mode == NumericMode.exact and total != 1:
            raise DistributionError(f"probabilities sum to {total}, not 1")
        if self._mode == NumericMode.float and abs(total - 1.0) > tolerance:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        values.setflags(write=False)
        self._table = values
        self._tolerance = tolerance
        self._checked: Optional[Table] = None
        self._summed: Dict[FrozenSet[NodeId], Table] = {}

    @classmethod
    def from_mapping(
        cls,
        variables: Sequence[VariableSpec],
        mapping: Mapping[Tuple[int, ...], Any],
        mode: NumericMode = NumericMode.exact,
        tolerance: float = NORMALISATION_TOLERANCE,
    ) -> "DiscreteDistribution":
        shape = tuple(v.cardinality for v in variables)
        if math.prod(shape) > MAX_STATES:
            raise DistributionError(f"{math.prod(shape)} joint states exceed the limit of {MAX_STATES}")
        table = np.full(shape, _zero(mode), dtype=object if mode == NumericMode.exact else np.float64)
        for states, value in mapping.items():
            if len(states) != len(shape) or any(not 0 <= s < c for s, c in zip(states, shape)):
                raise DistributionError(f"{states} is not a joint state")
            table[tuple(states)] += Fraction(value) if mode == NumericMode.exact else float(value)
        return cls(variables, table, mode, tolerance)

    @classmethod
    def uniform(
        cls, variables: Sequence[VariableSpec], mode: NumericMode = NumericMode.exact
    ) -> "DiscreteDistribution":
        size = math.prod(v.cardinality for v in variables)
        shape = tuple(v.cardinality for v in variables)
        if mode == NumericMode.exact:
            return cls(variables, np.full(shape, Fraction(1, size), dtype=object), mode)
        return cls(variables, np.full(shape, 1.0 / size), mode)

    @property
    def variables(self) -> Tuple[VariableSpec, ...]:
        return self._variables

    @property
    def names(self) -> Tuple[NodeId, ...]:
        return self._names

    @property
    def mode(self) -> NumericMode:
        return self._mode

    @property
    def tolerance(self) -> float:
        return self._tolerance

    @property
    def table(self) -> Table:
        return self._table

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(v.cardinality for v in self._variables)

    def spec(self, name: NodeId) -> VariableSpec:
        for v in self._variables:
            if v.name == name:
                return v
        raise DistributionError(f"unknown variable '{name}'")

    def check_names(self, names: Iterable[NodeId]) -> Tuple[NodeId, ...]:
        """``names`` in variable order; unknown names are an error."""
        wanted = set(names)
        for n in sorted(wanted):
            if n not in self._names:
                raise DistributionError(f"unknown variable '{n}'")
        return tuple(n for n in self._names if n in wanted)

    def probability(self, assignment: Mapping[NodeId, Union[int, str]]) -> Scalar:
        if set(assignment) != set(self._names):
            raise DistributionError("a full assignment must give a state for every variable")
        index = tuple(self.spec(n).state_index(assignment[n]) for n in self._names)
        value: Scalar = self._table[index]
        return value

    def converted(self, mode: NumericMode) -> "DiscreteDistribution":
        if mode == self._mode:
            return self
        if mode == NumericMode.exact:
            raise DistributionError("a float distribution cannot be converted to exact arithmetic")
        return DiscreteDistribution(self._variables, self._table.astype(np.float64), mode)

    def checked_table(self) -> Table:
        """The table used by factorisation checks: rescaled to integers in exact mode."""
        if self._checked is None:
            if self._mode == NumericMode.exact:
                denominators = (v.denominator for v in self._table.ravel())
                denominator = reduce(lambda a, b: a * b // math.gcd(a, b), denominators, 1)
                scaled = [v.numerator * (denominator // v.denominator) for v in self._table.ravel()]
                dtype: Any = np.int64 if denominator < 2**31 else object
                self._checked = np.array(scaled, dtype=dtype).reshape(self._table.shape)
            else:
                self._checked = self._table
        return self._checked

    def summed(self, keep: Iterable[NodeId]) -> Table:
        """Sum of :meth:`checked_table` over the variables outside ``keep``, summed axes kept with size 1."""
        key = frozenset(keep)
        if key not in self._summed:
            self._summed[key] = _sum_keep(self.checked_table(), self._names, key, keepdims=True)
        return self._summed[key]

    def __eq__(self, __o: object) -> bool:
        if isinstance(__o, DiscreteDistribution):
            return self._variables == __o._variables and bool(np.array_equal(self._table, __o._table))
        return False

    def __hash__(self) -> int:
        return hash((self._variables, tuple(self._table.ravel())))

    def __repr__(self) -> str:
        return f"DiscreteDistribution({list(self._names)}, mode={self._mode.value})"


class Factor:
    """Conditional table ``p(target | given)`` over ``names`` (variable order).

    ``defined`` marks the ``given`` rows with positive probability; the other rows are all zero.
    """

    def __init__(
        self, target: NodeSet, given: NodeSet, variables: Sequence[VariableSpec], table: Table, defined: Table
    ):
        self._target = target
        self._given = given
        self._variables = tuple(variables)
        self._table = table
        self._defined = defined

    @property
    def target(self) -> NodeSet:
        return self._target

    @property
    def given(self) -> NodeSet:
        return self._given

    @property
    def names(self) -> Tuple[NodeId, ...]:
        return tuple(v.name for v in self._variables)

    @property
    def table(self) -> Table:
        return self._table

    @property
    def defined(self) -> Table:
        return self._defined

    def value(self, assignment: Mapping[NodeId, int]) -> Scalar:
        index = tuple(assignment[n] for n in self.names)
        result: Scalar = self._table[index]
        return result

    def row_defined(self, given_assignment: Mapping[NodeId, int]) -> bool:
        index = tuple(given_assignment[n] if n in self._given else 0 for n in self.names)
        return bool(self._defined[index])


class InterventionalMarginal:
    """Table over ``y_vars`` under the intervention ``x_assignment``."""

    def __init__(
        self,
        variables: Sequence[VariableSpec],
        x_assignment: Mapping[NodeId, int],
        table: Table,
        mode: NumericMode,
        warnings: Sequence[str] = (),
    ):
        self._variables = tuple(variables)
        self._x_assignment = dict(sorted(x_assignment.items()))
        self._table = np.asarray(table, dtype=object if mode == NumericMode.exact else np.float64).reshape(
            tuple(v.cardinality for v in self._variables)
        )
        self._mode = mode
        self._warnings = tuple(warnings)

    @property
    def variables(self) -> Tuple[VariableSpec, ...]:
        return self._variables

    @property
    def y_vars(self) -> Tuple[NodeId, ...]:
        return tuple(v.name for v in self._variables)

    @property
    def x_assignment(self) -> Dict[NodeId, int]:
        return dict(self._x_assignment)

    @property
    def table(self) -> Table:
        return self._table

    @property
    def mode(self) -> NumericMode:
        return self._mode

    @property
    def warnings(self) -> Tuple[str, ...]:
        return self._warnings

    def marginal(self, names: Iterable[NodeId]) -> "InterventionalMarginal":
        wanted = set(names)
        unknown = wanted - set(self.y_vars)
        if unknown:
            raise DistributionError(f"unknown variables {format_nodes(unknown)}")
        table = _sum_keep(self._table, self.y_vars, wanted)
        kept = [v for v in self._variables if v.name in wanted]
        return InterventionalMarginal(kept, self._x_assignment, table, self._mode, self._warnings)

    def value(self, assignment: Mapping[NodeId, Union[int, str]]) -> Scalar:
        index = tuple(v.state_index(assignment[v.name]) for v in self._variables)
        result: Scalar = self._table[index]
        return result

    def total(self) -> Scalar:
        result: Scalar = sum(self._table.ravel(), _zero(self._mode))
        return result

    def first_difference(
        self, other: "InterventionalMarginal", tolerance: float = DEFAULT_TOLERANCE
    ) -> Optional[Tuple[Assignment, float]]:
        """The first state (in row-major order) where the tables differ, with the difference magnitude.

        Exact tables are compared exactly; otherwise entries closer than ``tolerance`` count as equal.
        """
        if self.y_vars != other.y_vars:
            raise DistributionError(f"cannot compare marginals over {self.y_vars} and {other.y_vars}")
        exact = self._mode == NumericMode.exact and other._mode == NumericMode.exact
        for index in np.ndindex(*self._table.shape):
            diff = abs(self._table[index] - other._table[index])
            if (exact and diff != 0) or (not exact and float(diff) > tolerance):
                return tuple(zip(self.y_vars, (int(i) for i in index))), float(diff)
        return None

    def max_difference(self, other: "InterventionalMarginal") -> float:
        if self.y_vars != other.y_vars:
            raise DistributionError(f"cannot compare marginals over {self.y_vars} and {other.y_vars}")
        if self._table.size == 0:
            return 0.0
        return max(float(abs(a - b)) for a, b in zip(self._table.ravel(), other._table.ravel()))

    def describe(self) -> str:
        head = ", ".join(f"{k}={v}" for k, v in self._x_assignment.items())
        lines = [f"p({', '.join(self.y_vars) or '-'} | do({head}))"]
        for index in np.ndindex(*self._table.shape):
            states = " ".join(v.label(int(i)) for v, i in zip(self._variables, index))
            lines.append(f"  {states or '()'}  {_format_value(self._table[index])}")
        lines.extend(f"warning: {w}" for w in self._warnings)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variables": list(self.y_vars),
            "x": dict(self._x_assignment),
            "mode": self._mode.value,
            "entries": [
                {"state": [int(i) for i in index], "value": _format_value(self._table[index])}
                for index in np.ndindex(*self._table.shape)
            ],
            "warnings": list(self._warnings),
        }


def _format_value(value: Any) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


def marginal(p: DiscreteDistribution, s: Iterable[NodeId]) -> DiscreteDistribution:
    keep = p.check_names(s)
    table = _sum_keep(p.table, p.names, keep)
    return DiscreteDistribution([p.spec(n) for n in keep], table, p.mode, p.tolerance)


def conditional(p: DiscreteDistribution, target: Iterable[NodeId], given: Iterable[NodeId]) -> Factor:
    t = frozenset(p.check_names(target))
    g = frozenset(p.check_names(given))
    if t & g:
        raise DistributionError(f"target and given overlap on {format_nodes(t & g)}")
    names = p.check_names(t | g)
    joint = _sum_keep(p.table, p.names, names)
    denominator = _sum_keep(joint, names, g, keepdims=True)
    defined = np.asarray(denominator != 0, dtype=bool)
    safe = np.where(defined, denominator, _one(p.mode))
    table = np.where(defined, joint / safe, _zero(p.mode))
    if p.mode == NumericMode.float:
        table = table.astype(np.float64)
    return Factor(t, g, [p.spec(n) for n in names], table, defined)


def _check_variables_match(p: DiscreteDistribution, g: PDGraph) -> None:
    if set(p.names) != set(g.node_set):
        raise DistributionError(
            f"distribution variables {format_nodes(p.names)} do not match graph nodes {format_nodes(g.node_set)}"
        )


def _topological_order(dag: PDGraph) -> List[NodeId]:
    if not is_dag(dag):
        raise GraphError(f"expected a directed acyclic graph, got {dag!r}")
    return list(nx.lexicographical_topological_sort(dag.directed_graph()))


def markov_violation(
    p: DiscreteDistribution, dag: PDGraph, tolerance: float = DEFAULT_TOLERANCE
) -> Optional[Tuple[NodeId, Assignment]]:
    """First node whose ordered local Markov condition fails, with an assignment where it fails.

    Each node ``v`` with predecessors ``pred`` (in a topological order) and parents ``pa`` must satisfy
    ``p(v, pred) p(pa) = p(v, pa) p(pred)``.
    """
    _check_variables_match(p, dag)
    exact = p.mode == NumericMode.exact
    seen: List[NodeId] = []
    for v in _topological_order(dag):
        pred = frozenset(seen)
        pa = dag.parents_of(v)
        seen.append(v)
        if pa == pred:
            continue
        lhs = p.summed(pred | {v}) * p.summed(pa)
        rhs = p.summed(pa | {v}) * p.summed(pred)
        bad = lhs != rhs if exact else np.abs(lhs - rhs) > tolerance
        if np.any(bad):
            index = np.argwhere(bad)[0]
            scope = pred | {v}
            return v, tuple((n, int(index[i])) for i, n in enumerate(p.names) if n in scope)
    return None


def is_markov_to_dag(p: DiscreteDistribution, dag: PDGraph, tolerance: float = DEFAULT_TOLERANCE) -> bool:
    return markov_violation(p, dag, tolerance) is None


def is_compatible(
    p: DiscreteDistribution, g: GraphLike, exhaustive: bool = False, tolerance: float = DEFAULT_TOLERANCE
) -> bool:
    """Whether ``p`` is Markov to the DAGs ``g`` represents; one extension suffices unless ``exhaustive``."""
    sa = g if isinstance(g, SaMpdag) else SaMpdag(g)
    _check_variables_match(p, sa.graph)
    extensions = enumerate_extensions(sa)
    if not exhaustive:
        return is_markov_to_dag(p, extensions[0], tolerance)
    results = {is_markov_to_dag(p, d, tolerance) for d in extensions}
    if len(results) > 1:
        raise GraphError(f"consistent extensions of {sa!r} disagree on the Markov property")
    return results.pop()


def _check_assignment(p: DiscreteDistribution, assignment: Mapping[NodeId, Union[int, str]]) -> Dict[NodeId, int]:
    return {n: p.spec(n).state_index(assignment[n]) for n in p.check_names(assignment)}


def _format_row(row: Assignment) -> str:
    return ", ".join(f"{n}={s}" for n, s in row) or "()"


def _g_product(
    p: DiscreteDistribution,
    steps: Sequence[Tuple[NodeSet, NodeSet]],
    fixed: Mapping[NodeId, int],
    keep: Sequence[NodeId],
    strict: bool,
) -> Tuple[Table, List[str]]:
    """Product of ``p(target | given)`` over ``steps`` with ``fixed`` values plugged in.

    Steps must come in an order where every given variable that is not fixed is the target of an
    earlier step. A zero-probability given row reached with positive weight raises
    :class:`UndefinedRowError` when ``strict``; otherwise it contributes zero and is reported.
    """
    dtype: Any = object if p.mode == NumericMode.exact else np.float64
    acc = np.reshape(np.asarray(_one(p.mode), dtype=dtype), [1] * len(keep))
    warnings: List[str] = []
    for target, given in steps:
        factor = conditional(p, target, given)
        values = _align(factor.table, factor.names, fixed, keep)
        defined = _align(factor.defined, factor.names, fixed, keep)
        weight = _sum_keep(acc, keep, given, keepdims=True)
        reached = np.logical_and(np.logical_not(defined), np.asarray(weight > 0, dtype=bool))
        if np.any(reached):
            index = np.argwhere(reached)[0]
            row = tuple(
                (n, fixed[n] if n in fixed else int(index[keep.index(n)])) for n in p.names if n in given
            )
            message = f"p({', '.join(sorted(target))} | {_format_row(row)}) conditions on a zero-probability event"
            if strict:
                raise UndefinedRowError(f"undefined at this intervention: {message}", target, row)
            logger.warning(message)
            warnings.append(message)
        acc = acc * values
    return acc, warnings


def truncated_factorization(
    p: DiscreteDistribution, dag: PDGraph, x_assignment: Mapping[NodeId, Union[int, str]]
) -> InterventionalMarginal:
    """Interventional distribution of every non-intervened variable under ``dag``."""
    _check_variables_match(p, dag)
    fixed = _check_assignment(p, x_assignment)
    steps = [(frozenset((v,)), dag.parents_of(v)) for v in _topological_order(dag) if v not in fixed]
    keep = tuple(n for n in p.names if n not in fixed)
    table, warnings = _g_product(p, steps, fixed, keep, strict=False)
    shape = tuple(p.spec(n).cardinality for n in keep)
    return InterventionalMarginal(
        [p.spec(n) for n in keep], fixed, np.broadcast_to(table, shape), p.mode, warnings
    )


def evaluate_formula(
    f: IdentFormula, p: DiscreteDistribution, x_assignment: Mapping[NodeId, Union[int, str]]
) -> InterventionalMarginal:
    fixed = _check_assignment(p, x_assignment)
    if set(fixed) != set(f.query.x):
        raise DistributionError(
            f"the intervention must set exactly {format_nodes(f.query.x)}, got {format_nodes(fixed)}"
        )
    keep = p.check_names(f.integrand_vars | f.query.y)
    p.check_names(f.variables)
    table, _ = _g_product(p, f.blocks, fixed, keep, strict=True)
    y_names = p.check_names(f.query.y)
    table = _sum_keep(np.broadcast_to(table, tuple(p.spec(n).cardinality for n in keep)), keep, y_names)
    return InterventionalMarginal([p.spec(n) for n in y_names], fixed, table, p.mode)


def reweight_marginal(
    p: DiscreteDistribution, g: GraphLike, q: IdentQuery, x_assignment: Mapping[NodeId, Union[int, str]]
) -> InterventionalMarginal:
    """Marginal over ``y`` of ``p`` divided by the conditionals of the intervened ancestors of ``y``.

    Treatments that are not ancestors of ``y`` are summed out with the other variables.
    """
    graph = graph_of(g)
    _check_variables_match(p, graph)
    if not check_condition1(graph, q):
        raise NotIdentifiableError(
            f"a proper semi-directed path from {format_nodes(q.x)} to {format_nodes(q.y)} "
            "starts with an undirected edge"
        )
    fixed = _check_assignment(p, x_assignment)
    if set(fixed) != set(q.x):
        raise DistributionError(f"the intervention must set exactly {format_nodes(q.x)}, got {format_nodes(fixed)}")
    a = a_set(graph, q)
    fixed_a = {n: s for n, s in fixed.items() if n in a}
    keep = tuple(n for n in p.names if n not in a)
    numerator = _align(p.table, p.names, fixed_a, keep)
    denominator = np.reshape(np.asarray(_one(p.mode), dtype=numerator.dtype), [1] * len(keep))
    for block in chain_decomposition(graph, a):
        factor = conditional(p, block, parents(graph, block))
        denominator = denominator * _align(factor.table, factor.names, fixed_a, keep)
    denominator = np.broadcast_to(denominator, numerator.shape)
    zero = np.asarray(denominator == 0, dtype=bool)
    positive = np.asarray(numerator > 0, dtype=bool)
    if np.any(zero & positive):
        index = np.argwhere(zero & positive)[0]
        row = tuple((n, fixed_a[n] if n in fixed_a else int(index[keep.index(n)])) for n in p.names)
        raise UndefinedRowError(f"re-weighting undefined at {_format_row(row)}", a, row)
    ratio = np.where(zero, _zero(p.mode), numerator / np.where(zero, _one(p.mode), denominator))
    y_names = p.check_names(q.y)
    table = _sum_keep(np.asarray(ratio, dtype=numerator.dtype), keep, y_names)
    return InterventionalMarginal([p.spec(n) for n in y_names], fixed, table, p.mode)


def resolve_assignment(p: DiscreteDistribution, assignment: Mapping[NodeId, Union[int, str]]) -> Dict[NodeId, int]:
    """State indices for an assignment given by labels or indices."""
    return _check_assignment(p, assignment)


def _parse_value(token: str, mode: NumericMode, source: str, lineno: int) -> Scalar:
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"'{token}' is not a probability", source, lineno)
    return value if mode == NumericMode.exact else float(value)


def parse_distribution(
    text: str,
    source: str = "<string>",
    mode: NumericMode = NumericMode.exact,
    tolerance: float = NORMALISATION_TOLERANCE,
) -> DiscreteDistribution:
    """Parse ``variable`` lines followed by a ``dense:`` or ``sparse:`` section."""
    variables: List[VariableSpec] = []
    section: Optional[str] = None
    section_line = 0
    dense: List[Scalar] = []
    sparse: Dict[Tuple[int, ...], Scalar] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if len(line) == 0:
            continue
        if line in ("dense:", "sparse:"):
            if section is not None:
                raise ParseError(f"a second '{line}' section", source, lineno)
            if len(variables) == 0:
                raise ParseError("no variables declared before the table", source, lineno)
            section, section_line = line[:-1], lineno
            continue
        tokens = line.split()
        if section is None:
            if tokens[0] != "variable" or len(tokens) < 3:
                raise ParseError(f"expected 'variable <name> <cardinality> [labels]', got '{line}'", source, lineno)
            name = tokens[1]
            if any(v.name == name for v in variables):
                raise ParseError(f"duplicate variable '{name}'", source, lineno)
            try:
                variables.append(VariableSpec(name, int(tokens[2]), tokens[3:] or None))
            except (ValueError, DistributionError) as e:
                raise ParseError(str(e), source, lineno)
        elif section == "dense":
            dense.extend(_parse_value(t, mode, source, lineno) for t in tokens)
        else:
            if len(tokens) != len(variables) + 1:
                raise ParseError(f"expected {len(variables)} states and a probability", source, lineno)
            try:
                states = tuple(v.state_index(t) for v, t in zip(variables, tokens))
            except DistributionError as e:
                raise ParseError(str(e), source, lineno)
            if states in sparse:
                raise ParseError(f"duplicate entry for state {' '.join(tokens[:-1])}", source, lineno)
            sparse[states] = _parse_value(tokens[-1], mode, source, lineno)
    if section is None:
        raise ParseError("missing 'dense:' or 'sparse:' section", source, len(text.splitlines()))
    try:
        if section == "dense":
            return DiscreteDistribution(variables, np.array(dense, dtype=object), mode, tolerance)
        return DiscreteDistribution.from_mapping(variables, sparse, mode, tolerance)
    except DistributionError as e:
        raise ParseError(str(e), source, section_line)


def load_distribution(
    path: Union[str, "os.PathLike[str]"],
    mode: NumericMode = NumericMode.exact,
    tolerance: float = NORMALISATION_TOLERANCE,
) -> DiscreteDistribution:
    with open(path, encoding="utf-8") as f:
        return parse_distribution(f.read(), os.fspath(path), mode, tolerance)


def dump_distribution(p: DiscreteDistribution) -> str:
    lines = []
    for v in p.variables:
        labels = "" if v.labels is None else " " + " ".join(v.labels)
        lines.append(f"variable {v.name} {v.cardinality}{labels}")
    flat = list(p.table.ravel())
    zeros = sum(1 for value in flat if value == 0)
    if 2 * zeros >= len(flat):
        lines.append("sparse:")
        for index in np.ndindex(*p.table.shape):
            if p.table[index] != 0:
                states = " ".join(v.label(int(i)) for v, i in zip(p.variables, index))
                lines.append(f"{states} {_format_value(p.table[index])}".strip())
    else:
        lines.append("dense:")
        width = p.variables[-1].cardinality if p.variables else 1
        for start in range(0, len(flat), width):
            lines.append(" ".join(_format_value(value) for value in flat[start : start + width]))
    return "\n".join(lines) + "\n"
