from unittest import TestCase

from test_base import example1

from simident import density, factory
from simident.base import GraphError, NumericMode
from simident.graph import is_dag
from simident.mpdag import enumerate_extensions

NODES = ["1", "2", "3", "4", "5"]


class DagFactoryTestCase(TestCase):
    def test_seeded_runs_repeat(self) -> None:
        first = factory.DagFactory(NODES, seed=3)
        second = factory.DagFactory(NODES, seed=3)
        self.assertEqual([first.create() for _ in range(5)], [second() for _ in range(5)])
        self.assertEqual(first.seed, 3)

    def test_creates_dags(self) -> None:
        sut = factory.DagFactory(NODES, edge_probability=0.7, seed=0)
        for _ in range(20):
            g = sut.create()
            self.assertTrue(is_dag(g))
            self.assertEqual(g.node_set, frozenset(NODES))

    def test_extreme_probabilities(self) -> None:
        self.assertEqual(factory.DagFactory(NODES, 0.0, seed=0).create().edge_count, 0)
        self.assertEqual(factory.DagFactory(NODES, 1.0, seed=0).create().edge_count, 10)

    def test_invalid_probability(self) -> None:
        with self.assertRaises(ValueError):
            factory.DagFactory(NODES, 1.5)

    def test_supergraph(self) -> None:
        sut = factory.DagFactory(NODES, edge_probability=0.3, seed=8)
        for _ in range(10):
            dag = sut.create()
            bigger = sut.supergraph(dag, 0.5)
            self.assertTrue(is_dag(bigger))
            self.assertTrue(dag.directed_edges <= bigger.directed_edges)


class SaMpdagFactoryTestCase(TestCase):
    def test_dag_is_represented(self) -> None:
        sut = factory.SaMpdagFactory(NODES, 0.5, background_probability=0.5, seed=2)
        for _ in range(10):
            g, dag = sut.create_with_dag()
            self.assertIn(dag, enumerate_extensions(g))

    def test_no_background_gives_cpdags(self) -> None:
        sut = factory.SaMpdagFactory(NODES, 0.5, seed=2)
        for _ in range(10):
            self.assertIsNone(sut.create().provenance)


class DensityFactoryTestCase(TestCase):
    def test_seeded_runs_repeat(self) -> None:
        g = example1()[1]
        self.assertEqual(
            factory.DensityFactory(g, 2, NumericMode.exact, seed=5).create(),
            factory.DensityFactory(g, 2, NumericMode.exact, seed=5).create(),
        )

    def test_undirected_graph_uses_an_extension(self) -> None:
        g = example1()[0]
        sut = factory.DensityFactory(g, arity=3, seed=1)
        self.assertIn(sut.dag, enumerate_extensions(g))
        p = sut.create()
        self.assertEqual(p.cardinalities, (3, 3, 3, 3))
        self.assertTrue(density.is_compatible(p, g))

    def test_invalid_arity(self) -> None:
        with self.assertRaises(ValueError):
            factory.DensityFactory(example1()[1], arity=0)


class QueryFactoryTestCase(TestCase):
    def test_queries_are_disjoint(self) -> None:
        sut = factory.QueryFactory(NODES, max_size=2, seed=9)
        for _ in range(30):
            q = sut.create()
            self.assertEqual(q.x & q.y, frozenset())
            self.assertTrue(1 <= len(q.x) <= 2)
            self.assertTrue(1 <= len(q.y) <= 2)
            self.assertTrue(q.x | q.y <= frozenset(NODES))

    def test_two_nodes(self) -> None:
        q = factory.QueryFactory(["a", "b"], seed=0).create()
        self.assertEqual(q.x | q.y, frozenset({"a", "b"}))

    def test_too_few_nodes(self) -> None:
        with self.assertRaises(GraphError):
            factory.QueryFactory(["a"])


class CandidateSetFactoryTestCase(TestCase):
    def test_candidate_sets(self) -> None:
        sut = factory.CandidateSetFactory(NODES[:4], size=(2, 3), seed=6)
        for _ in range(10):
            gs, base = sut.create_with_base()
            self.assertTrue(2 <= len(gs) <= 3)
            self.assertEqual(gs.node_set, frozenset(NODES[:4]))
            p = factory.DensityFactory(base, seed=0).create()
            for g in gs:
                self.assertTrue(density.is_compatible(p, g))

    def test_invalid_size(self) -> None:
        with self.assertRaises(ValueError):
            factory.CandidateSetFactory(NODES, size=(3, 2))

    def test_shared_generator(self) -> None:
        sut = factory.CandidateSetFactory(NODES, seed=1)
        self.assertIs(sut.rng, factory.CandidateSetFactory(NODES, rng=sut.rng).rng)
