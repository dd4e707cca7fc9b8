__version__ = "0.1.0"
__author__ = "osoken"
__description__ = "Simultaneous causal effect identification across sets of partially directed graphs"
__email__ = "osoken.devel@outlook.jp"
__package_name__ = "simident"


from .base import (
    GraphError,
    NotIdentifiableError,
    NotSaMpdagError,
    NumericMode,
    OrientationConflictError,
    ParseError,
    SimidentError,
    UndefinedRowError,
    Verdict,
)
from .chain import EquivalenceVerdict, MinimalComplex, equivalent, minimal_complexes
from .density import (
    DiscreteDistribution,
    VariableSpec,
    evaluate_formula,
    load_distribution,
    reweight_marginal,
    truncated_factorization,
)
from .factory import CandidateSetFactory, DagFactory, DensityFactory, QueryFactory, SaMpdagFactory
from .graph import PDGraph, dump_graph, parse_graph
from .identify import (
    CandidateSet,
    IdentFormula,
    IdentQuery,
    IdentReport,
    a_set,
    build_formula,
    rm,
    simultaneous_identify,
)
from .ledger import ReportLedger
from .mpdag import BackgroundKnowledge, SaMpdag, enumerate_extensions, load_sa_mpdag, meek_close, sa_mpdag_from_text
from .oracle import brute_force_check, counterexample_search, soundness_audit, sparsest_cpdag_search

__all__ = [
    "PDGraph",
    "BackgroundKnowledge",
    "SaMpdag",
    "CandidateSet",
    "IdentQuery",
    "IdentFormula",
    "IdentReport",
    "MinimalComplex",
    "EquivalenceVerdict",
    "DiscreteDistribution",
    "VariableSpec",
    "ReportLedger",
    "DagFactory",
    "SaMpdagFactory",
    "DensityFactory",
    "QueryFactory",
    "CandidateSetFactory",
    "NumericMode",
    "Verdict",
    "SimidentError",
    "GraphError",
    "NotSaMpdagError",
    "OrientationConflictError",
    "NotIdentifiableError",
    "UndefinedRowError",
    "ParseError",
    "parse_graph",
    "dump_graph",
    "sa_mpdag_from_text",
    "load_sa_mpdag",
    "load_distribution",
    "meek_close",
    "enumerate_extensions",
    "minimal_complexes",
    "equivalent",
    "a_set",
    "rm",
    "build_formula",
    "simultaneous_identify",
    "truncated_factorization",
    "evaluate_formula",
    "reweight_marginal",
    "brute_force_check",
    "counterexample_search",
    "sparsest_cpdag_search",
    "soundness_audit",
]
