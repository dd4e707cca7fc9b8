from fractions import Fraction
from unittest import TestCase

from test_base import correlated_pair, example1, example2

from simident import oracle
from simident.base import DistributionError, IncompatibleDensityError, NumericMode, PreconditionError
from simident.density import DiscreteDistribution
from simident.factory import CandidateSetFactory
from simident.graph import PDGraph, parse_graph
from simident.identify import CandidateSet, IdentQuery
from simident.mpdag import SaMpdag


def opposite_pair() -> CandidateSet:
    return CandidateSet([SaMpdag(PDGraph(["a", "b"], [("a", "b")])), SaMpdag(PDGraph(["a", "b"], [("b", "a")]))])


class BruteForceCheckTestCase(TestCase):
    def test_example1_agrees(self) -> None:
        verdict = oracle.brute_force_check(
            CandidateSet(example1()), oracle.example1_distribution(), IdentQuery(["3"], ["2"]), {"3": "101"}
        )
        self.assertTrue(verdict.all_agree)
        self.assertIsNone(verdict.witness)
        self.assertEqual(len(verdict.dags), 3)
        for m in verdict.marginals:
            self.assertEqual(list(m.table), [Fraction(1, 8)] * 8)
        self.assertTrue(verdict.to_dict()["all_agree"])

    def test_opposite_edges_disagree(self) -> None:
        verdict = oracle.brute_force_check(opposite_pair(), correlated_pair(), IdentQuery(["a"], ["b"]), {"a": 1})
        self.assertFalse(verdict.all_agree)
        witness = verdict.witness
        assert witness is not None
        self.assertEqual((witness.i, witness.j), (0, 1))
        self.assertEqual(witness.assignment, (("b", 0),))
        self.assertAlmostEqual(witness.magnitude, 0.25)
        self.assertIn("DAGs 1 and 2 disagree at b=0", verdict.describe())
        self.assertEqual(verdict.to_dict()["witness"]["dags"], [0, 1])

    def test_incompatible_density(self) -> None:
        gs = CandidateSet([SaMpdag(PDGraph(["a", "b"]))])
        with self.assertRaises(IncompatibleDensityError):
            oracle.brute_force_check(gs, correlated_pair(), IdentQuery(["a"], ["b"]), {"a": 0})

    def test_intervention_must_cover_x(self) -> None:
        with self.assertRaises(DistributionError):
            oracle.brute_force_check(opposite_pair(), correlated_pair(), IdentQuery(["a"], ["b"]), {})


class CounterexampleSearchTestCase(TestCase):
    def test_opposite_edges(self) -> None:
        found = oracle.counterexample_search(opposite_pair(), IdentQuery(["a"], ["b"]), trials=5, seed=1)
        assert found is not None
        p, verdict = found
        self.assertIsInstance(p, DiscreteDistribution)
        self.assertFalse(verdict.all_agree)

    def test_float_mode(self) -> None:
        found = oracle.counterexample_search(
            opposite_pair(), IdentQuery(["a"], ["b"]), trials=5, seed=2, mode=NumericMode.float
        )
        assert found is not None
        self.assertEqual(found[0].mode, NumericMode.float)

    def test_identifiable_set_is_rejected(self) -> None:
        with self.assertRaises(PreconditionError):
            oracle.counterexample_search(CandidateSet(example1()), IdentQuery(["3"], ["2"]))
        with self.assertRaises(PreconditionError):
            oracle.counterexample_search(CandidateSet(example2()), IdentQuery(["4"], ["5"]))


class ExamplesTestCase(TestCase):
    def test_example_graphs(self) -> None:
        self.assertEqual(oracle.example1_graphs(), example1())
        self.assertEqual(oracle.example2_graphs(), example2())

    def test_example1_labels(self) -> None:
        p = oracle.example1_distribution()
        self.assertEqual(p.spec("1").label(5), "101")
        self.assertEqual(p.spec("4").label(0), "0000")
        self.assertEqual(p.spec("4").label(35), "2211")


class SearchTestCase(TestCase):
    def test_enumerate_dags(self) -> None:
        self.assertEqual(sum(1 for _ in oracle.enumerate_dags(["a", "b", "c"])), 25)
        self.assertEqual(sum(1 for _ in oracle.enumerate_dags(["1", "2", "3", "4"])), 543)
        self.assertEqual(sum(1 for _ in oracle.enumerate_dags(["a", "b", "c"], 3)), 6)

    def test_sparsest_of_correlated_pair(self) -> None:
        cpdags = oracle.sparsest_cpdag_search(correlated_pair())
        self.assertEqual(cpdags, [PDGraph(["a", "b"], [], [("a", "b")])])

    def test_sparsest_of_example1(self) -> None:
        cpdags = oracle.sparsest_cpdag_search(oracle.example1_distribution())
        self.assertEqual(cpdags, [PDGraph(["1", "2", "3", "4"], [("2", "4"), ("3", "4")], [("1", "2")])])
        for text in oracle.EXAMPLE1_GRAPH_TEXTS.values():
            self.assertNotIn(parse_graph(text), cpdags)

    def test_sparsest_node_mismatch(self) -> None:
        with self.assertRaises(DistributionError):
            oracle.sparsest_cpdag_search(correlated_pair(), ["a", "c"])

    def test_pairwise_non_equivalent(self) -> None:
        forward = PDGraph(["a", "b"], [("a", "b")])
        self.assertFalse(oracle.pairwise_non_equivalent([forward, PDGraph(["a", "b"], [("b", "a")])]))
        self.assertTrue(oracle.pairwise_non_equivalent([forward, PDGraph(["a", "b"])]))


class SoundnessAuditTestCase(TestCase):
    def test_small_audit_passes(self) -> None:
        factory = CandidateSetFactory(["1", "2", "3", "4"], seed=0)
        report = oracle.soundness_audit(factory, densities=3, seed=0, sets=4)
        self.assertTrue(report.passed, report.describe())
        self.assertEqual(report.failures, ())
        self.assertLessEqual(report.sets, 4)
        self.assertEqual(report.densities, report.sets * 3)
        self.assertEqual(report.to_dict()["passed"], True)

    def test_exact_audit_passes(self) -> None:
        factory = CandidateSetFactory(["1", "2", "3"], size=(2, 2), seed=4)
        report = oracle.soundness_audit(factory, densities=2, seed=4, sets=2, mode=NumericMode.exact)
        self.assertTrue(report.passed, report.describe())
