from unittest import TestCase

from test_base import EXAMPLE1_G1, EXAMPLE1_G2

from simident import chain
from simident.base import GraphError
from simident.chain import EquivalenceVerdict, EquivalenceWitness, MinimalComplex, WitnessKind
from simident.factory import SaMpdagFactory
from simident.graph import PDGraph, parse_graph
from simident.mpdag import enumerate_extensions


def long_complex() -> PDGraph:
    return PDGraph(["a", "b", "c", "d"], [("a", "b"), ("d", "c")], [("b", "c")])


class MinimalComplexTestCase(TestCase):
    def test_normalised_orientation(self) -> None:
        sut = MinimalComplex("d", ["c", "b"], "a")
        self.assertEqual(sut.left, "a")
        self.assertEqual(sut.core, ("b", "c"))
        self.assertEqual(sut.right, "d")
        self.assertEqual(sut, MinimalComplex("a", ["b", "c"], "d"))
        self.assertEqual(hash(sut), hash(MinimalComplex("a", ["b", "c"], "d")))

    def test_str(self) -> None:
        self.assertEqual(str(MinimalComplex("a", ["b", "c"], "d")), "a -> b -- c <- d")
        self.assertEqual(str(MinimalComplex("1", ["4"], "3")), "1 -> 4 <- 3")

    def test_empty_core(self) -> None:
        with self.assertRaises(GraphError):
            MinimalComplex("a", [], "b")

    def test_to_dict(self) -> None:
        self.assertEqual(MinimalComplex("3", ["4"], "1").to_dict(), {"left": "1", "core": ["4"], "right": "3"})


class MinimalComplexesTestCase(TestCase):
    def test_example1_g1(self) -> None:
        self.assertEqual(
            chain.minimal_complexes(parse_graph(EXAMPLE1_G1)),
            [MinimalComplex("1", ["4"], "3"), MinimalComplex("2", ["4"], "3")],
        )

    def test_example1_g2(self) -> None:
        self.assertEqual(chain.minimal_complexes(parse_graph(EXAMPLE1_G2)), [MinimalComplex("1", ["4"], "3")])

    def test_long_core(self) -> None:
        self.assertEqual(chain.minimal_complexes(long_complex()), [MinimalComplex("a", ["b", "c"], "d")])

    def test_shortcut_breaks_minimality(self) -> None:
        g = PDGraph(["a", "b", "c", "d"], [("a", "b"), ("d", "c"), ("a", "c")], [("b", "c")])
        self.assertEqual(chain.minimal_complexes(g), [MinimalComplex("a", ["c"], "d")])

    def test_every_chordless_core_is_kept(self) -> None:
        g = PDGraph(
            ["l", "b", "m1", "m2", "c", "r"],
            [("l", "b"), ("r", "c")],
            [("b", "m1"), ("b", "m2"), ("m1", "m2"), ("m1", "c"), ("m2", "c")],
        )
        self.assertEqual(
            chain.minimal_complexes(g),
            [MinimalComplex("l", ["b", "m1", "c"], "r"), MinimalComplex("l", ["b", "m2", "c"], "r")],
        )

    def test_no_complex_without_colliding_arrows(self) -> None:
        g = PDGraph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        self.assertEqual(chain.minimal_complexes(g), [])

    def test_dag_complexes_are_unshielded_colliders(self) -> None:
        factory = SaMpdagFactory([str(i) for i in range(1, 6)], edge_probability=0.5, seed=5)
        for _ in range(20):
            g = factory.create()
            for mc in chain.minimal_complexes(g.graph):
                self.assertEqual(len(mc.core), 1)
                self.assertFalse(g.graph.is_adjacent(mc.left, mc.right))


class EquivalentTestCase(TestCase):
    def test_example1_graphs_differ_by_a_complex(self) -> None:
        verdict = chain.equivalent(parse_graph(EXAMPLE1_G1), parse_graph(EXAMPLE1_G2))
        self.assertFalse(verdict.equivalent)
        self.assertFalse(verdict)
        assert verdict.witness is not None
        self.assertEqual(verdict.witness.kind, WitnessKind.complex)
        self.assertEqual(verdict.witness.graph_index, 0)
        self.assertEqual(verdict.witness.minimal_complex, MinimalComplex("2", ["4"], "3"))
        self.assertEqual(verdict.describe(), "not equivalent: minimal complex 2 -> 4 <- 3 appears only in graph 1")

    def test_skeleton_witness(self) -> None:
        verdict = chain.equivalent(PDGraph(["a", "b"]), PDGraph(["a", "b"], [("a", "b")]))
        assert verdict.witness is not None
        self.assertEqual(verdict.witness.kind, WitnessKind.skeleton)
        self.assertEqual(verdict.witness.graph_index, 1)
        self.assertEqual(verdict.witness.edge, ("a", "b"))

    def test_markov_equivalent_dags(self) -> None:
        forward = PDGraph(["a", "b", "c"], [("a", "b"), ("b", "c")])
        backward = PDGraph(["a", "b", "c"], [("c", "b"), ("b", "a")])
        collider = PDGraph(["a", "b", "c"], [("a", "b"), ("c", "b")])
        self.assertTrue(chain.equivalent(forward, backward).equivalent)
        self.assertFalse(chain.equivalent(forward, collider).equivalent)

    def test_long_complex_is_compared(self) -> None:
        moved = PDGraph(["a", "b", "c", "d"], [("b", "a"), ("d", "c")], [("b", "c")])
        verdict = chain.equivalent(long_complex(), moved)
        assert verdict.witness is not None
        self.assertEqual(verdict.witness.minimal_complex, MinimalComplex("a", ["b", "c"], "d"))

    def test_different_nodes(self) -> None:
        with self.assertRaises(GraphError):
            chain.equivalent(PDGraph(["a"]), PDGraph(["b"]))

    def test_node_mismatch_is_not_equivalent(self) -> None:
        verdict = chain.equivalent_or_node_mismatch(PDGraph(["a", "b"]), PDGraph(["b"]))
        assert verdict.witness is not None
        self.assertEqual(verdict.witness.kind, WitnessKind.nodes)
        self.assertEqual(verdict.witness.nodes, frozenset({"a"}))
        self.assertEqual(
            verdict.to_dict(),
            {"equivalent": False, "witness": {"kind": "nodes", "graph_index": 0, "nodes": ["a"]}},
        )

    def test_each_extension_is_equivalent_to_its_cpdag(self) -> None:
        factory = SaMpdagFactory([str(i) for i in range(1, 6)], edge_probability=0.5, seed=7)
        for _ in range(15):
            g = factory.create()
            for d in enumerate_extensions(g):
                self.assertTrue(chain.equivalent(d, g.graph).equivalent)


class EquivalenceVerdictTestCase(TestCase):
    def test_witness_consistency(self) -> None:
        witness = EquivalenceWitness(WitnessKind.skeleton, 0, edge=("a", "b"))
        with self.assertRaises(ValueError):
            EquivalenceVerdict(True, witness)
        with self.assertRaises(ValueError):
            EquivalenceVerdict(False)

    def test_equivalent_to_dict(self) -> None:
        self.assertEqual(EquivalenceVerdict(True).to_dict(), {"equivalent": True, "witness": None})
        self.assertEqual(EquivalenceVerdict(True).describe(), "equivalent")


class RmPatternTestCase(TestCase):
    def test_violation(self) -> None:
        g = PDGraph(["a", "b", "c"], [("a", "b")], [("b", "c")])
        self.assertEqual(chain.rm_pattern_violation(g), ("a", "b", "c"))
        self.assertFalse(chain.rm_pattern_check(g))

    def test_pattern_holds(self) -> None:
        g = PDGraph(["a", "b", "c"], [("a", "b"), ("a", "c")], [("b", "c")])
        self.assertIsNone(chain.rm_pattern_violation(g))
        self.assertTrue(chain.rm_pattern_check(g))
