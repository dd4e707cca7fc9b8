import argparse
import hashlib
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Tuple

if sys.version_info >= (3, 9):
    from collections.abc import Sequence
else:
    from typing import Sequence

from . import __package_name__, __version__
from .base import (
    DEFAULT_TOLERANCE,
    DistributionError,
    GraphError,
    NodeId,
    NumericMode,
    OutputFormat,
    ParseError,
    SimidentError,
    UsageError,
    format_nodes,
)
from .chain import equivalent
from .density import DiscreteDistribution, dump_distribution, evaluate_formula, load_distribution, resolve_assignment
from .factory import CandidateSetFactory
from .graph import PDGraph, dump_graph, load_graph_document
from .identify import CandidateSet, IdentQuery, rm, simultaneous_identify
from .ledger import Document, ReportLedger, serialize_document
from .logger import logger
from .mpdag import BackgroundKnowledge, enumerate_extensions, load_sa_mpdag, meek_close
from .oracle import (
    EXAMPLE1_GRAPH_TEXTS,
    EXAMPLE2_GRAPH_TEXTS,
    brute_force_check,
    counterexample_search,
    example1_distribution,
    example2_graphs,
    pairwise_non_equivalent,
    soundness_audit,
    sparsest_cpdag_search,
)

OUTPUT_DIR_ENV = "SIMIDENT_OUTPUT_DIR"

SUBCOMMANDS = ("identify", "rm", "extensions", "equiv", "evaluate", "oracle", "fixtures", "sparsest", "audit")
FIXTURE_BUNDLES = ("example1", "example2")


class RunConfig:
    """Immutable settings of one command-line run."""

    def __init__(
        self,
        subcommand: str,
        graphs: Sequence[str] = (),
        x: Sequence[str] = (),
        y: Sequence[str] = (),
        distribution: Optional[str] = None,
        mode: NumericMode = NumericMode.exact,
        tolerance: float = DEFAULT_TOLERANCE,
        seed: int = 0,
        trials: int = 100,
        arity: int = 2,
        sets: int = 50,
        densities: int = 100,
        nodes: int = 4,
        bundles: Sequence[str] = (),
        output_format: OutputFormat = OutputFormat.text,
        output: Optional[str] = None,
        ledger: Optional[str] = None,
        verbose: bool = False,
    ):
        if subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand '{subcommand}'")
        for bundle in bundles:
            if bundle not in FIXTURE_BUNDLES:
                raise UsageError(f"unknown fixture bundle '{bundle}', expected one of {', '.join(FIXTURE_BUNDLES)}")
        self._subcommand = subcommand
        self._graphs = tuple(graphs)
        self._x = tuple(x)
        self._y = tuple(y)
        self._distribution = distribution
        self._mode = NumericMode(mode)
        self._tolerance = tolerance
        self._seed = seed
        self._trials = trials
        self._arity = arity
        self._sets = sets
        self._densities = densities
        self._nodes = nodes
        self._bundles = tuple(bundles)
        self._output_format = OutputFormat(output_format)
        self._output = output
        self._ledger = ledger
        self._verbose = verbose

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            ns.subcommand,
            graphs=getattr(ns, "graphs", None) or (),
            x=getattr(ns, "x", None) or (),
            y=getattr(ns, "y", None) or (),
            distribution=getattr(ns, "distribution", None),
            mode=ns.mode,
            tolerance=ns.tolerance,
            seed=ns.seed,
            trials=getattr(ns, "trials", 100),
            arity=getattr(ns, "arity", 2),
            sets=getattr(ns, "sets", 50),
            densities=getattr(ns, "densities", 100),
            nodes=getattr(ns, "nodes", 4),
            bundles=getattr(ns, "bundles", None) or (),
            output_format=ns.format,
            output=ns.output,
            ledger=ns.ledger,
            verbose=ns.verbose,
        )

    @property
    def subcommand(self) -> str:
        return self._subcommand

    @property
    def graphs(self) -> Tuple[str, ...]:
        return self._graphs

    @property
    def x(self) -> Tuple[str, ...]:
        return self._x

    @property
    def y(self) -> Tuple[str, ...]:
        return self._y

    @property
    def distribution(self) -> Optional[str]:
        return self._distribution

    @property
    def mode(self) -> NumericMode:
        return self._mode

    @property
    def tolerance(self) -> float:
        return self._tolerance

    @property
    def seed(self) -> int:
        return self._seed

    @property
    def trials(self) -> int:
        return self._trials

    @property
    def arity(self) -> int:
        return self._arity

    @property
    def sets(self) -> int:
        return self._sets

    @property
    def densities(self) -> int:
        return self._densities

    @property
    def nodes(self) -> int:
        return self._nodes

    @property
    def bundles(self) -> Tuple[str, ...]:
        return self._bundles

    @property
    def output_format(self) -> OutputFormat:
        return self._output_format

    @property
    def output(self) -> Optional[str]:
        return self._output

    @property
    def ledger(self) -> Optional[str]:
        return self._ledger

    @property
    def verbose(self) -> bool:
        return self._verbose

    def to_dict(self) -> Dict[str, Any]:
        """Settings that influence the report; presentation settings are left out."""
        d: Dict[str, Any] = {
            "graphs": list(self._graphs),
            "x": list(self._x),
            "y": list(self._y),
            "distribution": self._distribution,
            "mode": self._mode.value,
        }
        if self._mode == NumericMode.float:
            d["tolerance"] = self._tolerance
        if self._subcommand in ("oracle", "audit"):
            d.update(seed=self._seed, trials=self._trials, arity=self._arity)
        if self._subcommand == "audit":
            d.update(sets=self._sets, densities=self._densities, nodes=self._nodes)
        if self._subcommand == "fixtures":
            d["bundles"] = list(self._bundles)
        return d


def _digest_file(path: str) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


def _split_x(tokens: Sequence[str]) -> Dict[NodeId, Optional[str]]:
    result: Dict[NodeId, Optional[str]] = {}
    for token in tokens:
        name, sep, state = token.partition("=")
        if len(name) == 0 or (sep and len(state) == 0):
            raise UsageError(f"malformed treatment '{token}', expected NAME or NAME=STATE")
        if name in result:
            raise UsageError(f"treatment '{name}' given twice")
        result[name] = state if sep else None
    return result


def _query(config: RunConfig, nodes: Sequence[NodeId]) -> IdentQuery:
    x = _split_x(config.x)
    for n in sorted(set(x) | set(config.y)):
        if n not in nodes:
            raise UsageError(f"node '{n}' does not appear in the graph files")
    if len(x) == 0 or len(config.y) == 0:
        raise UsageError("both --x and --y are required")
    try:
        return IdentQuery(x, config.y)
    except GraphError as e:
        raise UsageError(str(e))


def _assignment(config: RunConfig, p: DiscreteDistribution) -> Dict[NodeId, int]:
    x = _split_x(config.x)
    missing = sorted(n for n, s in x.items() if s is None)
    if missing:
        raise UsageError(f"treatments {format_nodes(missing)} need a state, as in NAME=STATE")
    try:
        return resolve_assignment(p, {n: s for n, s in x.items() if s is not None})
    except DistributionError as e:
        raise UsageError(str(e))


def _candidates(config: RunConfig) -> CandidateSet:
    if len(config.graphs) == 0:
        raise UsageError("at least one graph file is required")
    return CandidateSet(load_sa_mpdag(path) for path in config.graphs)


def _load_chain_graph(path: str) -> PDGraph:
    graph, background = load_graph_document(path)
    if len(background) == 0:
        return graph
    return meek_close(graph, BackgroundKnowledge(background))


def _distribution(config: RunConfig) -> DiscreteDistribution:
    if config.distribution is None:
        raise UsageError("--distribution is required")
    return load_distribution(config.distribution, config.mode)


def _run_identify(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    gs = _candidates(config)
    report = simultaneous_identify(gs, _query(config, gs.nodes))
    return report.to_dict(), report.describe()


def _run_rm(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    gs = _candidates(config)
    q = _query(config, gs.nodes)
    graphs = [rm(g, q) for g in gs]
    texts = [dump_graph(g) for g in graphs]
    report = {"graphs": texts}
    return report, "\n".join(f"# graph {i + 1}\n{t}" for i, t in enumerate(texts)).rstrip("\n")


def _run_extensions(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    gs = _candidates(config)
    per_graph = [[dump_graph(d) for d in enumerate_extensions(g)] for g in gs]
    lines = []
    for i, dags in enumerate(per_graph):
        lines.append(f"# graph {i + 1}: {len(dags)} consistent extension(s)")
        lines.extend(dags)
    return {"extensions": per_graph}, "\n".join(lines).rstrip("\n")


def _run_equiv(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    if len(config.graphs) != 2:
        raise UsageError("equiv compares exactly two graph files")
    verdict = equivalent(*(_load_chain_graph(path) for path in config.graphs))
    return verdict.to_dict(), verdict.describe()


def _run_evaluate(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    gs = _candidates(config)
    q = _query(config, gs.nodes)
    p = _distribution(config)
    assignment = _assignment(config, p)
    report = simultaneous_identify(gs, q)
    if report.formula is None:
        raise SimidentError(f"the effect of {format_nodes(q.x)} on {format_nodes(q.y)} is not determined")
    value = evaluate_formula(report.formula, p, assignment)
    return (
        {"identification": report.to_dict(), "marginal": value.to_dict()},
        f"formula: {report.formula.describe()}\n{value.describe()}",
    )


def _run_oracle(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    gs = _candidates(config)
    q = _query(config, gs.nodes)
    if config.distribution is not None:
        p = _distribution(config)
        verdict = brute_force_check(gs, p, q, _assignment(config, p), config.tolerance)
        return {"verdict": verdict.to_dict()}, verdict.describe()
    found = counterexample_search(gs, q, config.arity, config.trials, config.seed, config.mode, config.tolerance)
    if found is None:
        text = f"no counterexample in {config.trials} trial(s) (seed {config.seed})"
        return {"counterexample": None, "seed": config.seed}, text
    p, verdict = found
    counterexample = {"distribution": dump_distribution(p), "verdict": verdict.to_dict()}
    report = {"counterexample": counterexample, "seed": config.seed}
    return report, f"counterexample (seed {config.seed}):\n{dump_distribution(p)}{verdict.describe()}"


def _fixture_files(bundles: Sequence[str]) -> Dict[str, str]:
    files: Dict[str, str] = {}
    if "example1" in bundles:
        files["example1.dist"] = dump_distribution(example1_distribution())
        files.update(EXAMPLE1_GRAPH_TEXTS)
    if "example1" in bundles or "example2" in bundles:
        files.update(EXAMPLE2_GRAPH_TEXTS)
        q = IdentQuery(["4"], ["5"])
        for i, g in enumerate(example2_graphs(), start=1):
            files[f"example2_rm{i}.pdg"] = dump_graph(rm(g, q))
    return files


def _run_fixtures(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    directory = config.output or os.environ.get(OUTPUT_DIR_ENV, ".")
    bundles = config.bundles or ("example1",)
    files = _fixture_files(bundles)
    os.makedirs(directory, exist_ok=True)
    written = []
    for name in sorted(files):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(files[name])
        logger.info(f"wrote {path}")
        written.append(name)
    return {"files": written}, "\n".join(os.path.join(directory, n) for n in written)


def _run_sparsest(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    p = _distribution(config)
    cpdags = sparsest_cpdag_search(p, tolerance=config.tolerance)
    texts = [dump_graph(c) for c in cpdags]
    distinct = pairwise_non_equivalent(cpdags)
    lines = [f"{len(cpdags)} sparsest Markovian class(es), pairwise non-equivalent: {distinct}"]
    lines.extend(f"# class {i + 1}\n{t}" for i, t in enumerate(texts))
    return {"cpdags": texts, "pairwise_non_equivalent": distinct}, "\n".join(lines).rstrip("\n")


def _run_audit(config: RunConfig) -> Tuple[Dict[str, Any], str]:
    if not 2 <= config.nodes <= 5:
        raise UsageError("--nodes must lie between 2 and 5")
    factory = CandidateSetFactory([str(i) for i in range(1, config.nodes + 1)], seed=config.seed)
    audit = soundness_audit(
        factory, config.densities, config.seed, config.sets, config.arity, config.mode, config.tolerance
    )
    return audit.to_dict(), audit.describe()


_HANDLERS = {
    "identify": _run_identify,
    "rm": _run_rm,
    "extensions": _run_extensions,
    "equiv": _run_equiv,
    "evaluate": _run_evaluate,
    "oracle": _run_oracle,
    "fixtures": _run_fixtures,
    "sparsest": _run_sparsest,
    "audit": _run_audit,
}


def execute(config: RunConfig) -> Tuple[Document, str]:
    """Run the subcommand and return the structured document and the human-readable report."""
    report, text = _HANDLERS[config.subcommand](config)
    inputs = list(config.graphs) + ([config.distribution] if config.distribution else [])
    document: Document = {
        "tool": __package_name__,
        "version": __version__,
        "subcommand": config.subcommand,
        "inputs": {path: _digest_file(path) for path in inputs},
        "config": config.to_dict(),
        "report": report,
    }
    return document, text


def exit_status(e: BaseException) -> int:
    if isinstance(e, (ParseError, UsageError, OSError)):
        return 2
    return 1


def run(config: RunConfig) -> int:
    try:
        document, text = execute(config)
    except (SimidentError, OSError) as e:
        print(f"{__package_name__}: error: {e}", file=sys.stderr)
        return exit_status(e)
    if config.ledger is not None:
        ReportLedger(config.ledger).append(document)
    body = serialize_document(document) if config.output_format == OutputFormat.json else text + "\n"
    if config.output is not None and config.subcommand != "fixtures":
        with open(config.output, "w", encoding="utf-8") as f:
            f.write(body)
    else:
        sys.stdout.write(body)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.text.value)
    common.add_argument("--output", help="report file (for fixtures: the target directory)")
    common.add_argument("--mode", choices=[m.value for m in NumericMode], default=NumericMode.exact.value)
    common.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--ledger", help="sqlite file collecting structured run documents")
    common.add_argument("--verbose", action="store_true")

    query = argparse.ArgumentParser(add_help=False)
    query.add_argument("--graphs", nargs="+", required=True, metavar="GRAPH")
    query.add_argument("--x", "--do", dest="x", action="extend", nargs="+", default=[], metavar="NAME[=STATE]")
    query.add_argument("--y", action="extend", nargs="+", default=[], metavar="NAME")

    parser = argparse.ArgumentParser(prog=__package_name__, description="simultaneous causal effect identification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("identify", parents=[common, query], help="decide simultaneous identifiability")
    sub.add_parser("rm", parents=[common, query], help="print the reduced graph of each candidate")
    extensions = sub.add_parser("extensions", parents=[common], help="list the DAGs each graph represents")
    extensions.add_argument("--graphs", nargs="+", required=True, metavar="GRAPH")
    equiv = sub.add_parser("equiv", parents=[common], help="chain-graph Markov equivalence of two graphs")
    equiv.add_argument("graphs", nargs=2, metavar="GRAPH")
    evaluate = sub.add_parser("evaluate", parents=[common, query], help="evaluate the identification formula")
    evaluate.add_argument("--distribution", required=True)
    oracle = sub.add_parser("oracle", parents=[common, query], help="brute-force check or counterexample search")
    oracle.add_argument("--distribution")
    oracle.add_argument("--trials", type=int, default=100)
    oracle.add_argument("--arity", type=int, default=2)
    fixtures = sub.add_parser("fixtures", parents=[common], help="write the worked example files")
    fixtures.add_argument("bundles", nargs="*", default=[], metavar="{example1,example2}")
    sparsest = sub.add_parser("sparsest", parents=[common], help="sparsest Markovian CPDAGs of a distribution")
    sparsest.add_argument("--distribution", required=True)
    audit = sub.add_parser("audit", parents=[common], help="randomised soundness audit against the oracle")
    audit.add_argument("--sets", type=int, default=50)
    audit.add_argument("--densities", type=int, default=100)
    audit.add_argument("--nodes", type=int, default=4)
    audit.add_argument("--arity", type=int, default=2)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        config = RunConfig.from_namespace(ns)
    except SimidentError as e:
        print(f"{__package_name__}: error: {e}", file=sys.stderr)
        return exit_status(e)
    return run(config)
