from fractions import Fraction
from unittest import TestCase

import numpy as np
from test_base import EXAMPLE2_G1, SimidentTestCase, binary, correlated_pair, example1, example2, sa

from simident import density
from simident.base import (
    DistributionError,
    GraphError,
    NotIdentifiableError,
    NumericMode,
    ParseError,
    UndefinedRowError,
)
from simident.density import DiscreteDistribution, VariableSpec
from simident.factory import DensityFactory, QueryFactory, SaMpdagFactory
from simident.graph import PDGraph
from simident.identify import CandidateSet, IdentQuery, build_formula, check_condition1
from simident.mpdag import enumerate_extensions
from simident.oracle import brute_force_check, example1_distribution


def a_never_one() -> DiscreteDistribution:
    return DiscreteDistribution.from_mapping(binary("a", "b"), {(0, 0): Fraction(1, 2), (0, 1): Fraction(1, 2)})


class VariableSpecTestCase(TestCase):
    def test_state_index(self) -> None:
        v = VariableSpec("b", 3, ["low", "mid", "high"])
        self.assertEqual(v.state_index("mid"), 1)
        self.assertEqual(v.state_index("2"), 2)
        self.assertEqual(v.state_index(0), 0)
        self.assertEqual(v.label(2), "high")
        self.assertEqual(VariableSpec("a", 2).label(1), "1")

    def test_bad_states(self) -> None:
        v = VariableSpec("b", 3, ["low", "mid", "high"])
        with self.assertRaises(DistributionError):
            v.state_index("huge")
        with self.assertRaises(DistributionError):
            v.state_index(3)

    def test_bad_labels(self) -> None:
        with self.assertRaises(DistributionError):
            VariableSpec("a", 2, ["x"])
        with self.assertRaises(DistributionError):
            VariableSpec("a", 2, ["x", "x"])
        with self.assertRaises(DistributionError):
            VariableSpec("a", 0)


class DiscreteDistributionTestCase(TestCase):
    def test_exact_normalisation(self) -> None:
        with self.assertRaises(DistributionError):
            DiscreteDistribution(binary("a"), [Fraction(1, 2), Fraction(1, 3)])
        with self.assertRaises(DistributionError):
            DiscreteDistribution(binary("a"), [Fraction(3, 2), Fraction(-1, 2)])

    def test_float_tolerance(self) -> None:
        p = DiscreteDistribution(binary("a"), [0.5, 0.5 + 1e-14], NumericMode.float)
        self.assertEqual(p.mode, NumericMode.float)
        with self.assertRaises(DistributionError):
            DiscreteDistribution(binary("a"), [0.5, 0.6], NumericMode.float)

    def test_shape_and_names(self) -> None:
        with self.assertRaises(DistributionError):
            DiscreteDistribution(binary("a", "b"), [Fraction(1, 2), Fraction(1, 2)])
        with self.assertRaises(DistributionError):
            DiscreteDistribution.uniform(binary("a", "a"))

    def test_table_is_read_only(self) -> None:
        p = correlated_pair()
        with self.assertRaises(ValueError):
            p.table[0, 0] = Fraction(0)

    def test_probability_by_label(self) -> None:
        p = DiscreteDistribution.uniform([VariableSpec("a", 2, ["no", "yes"]), VariableSpec("b", 2)])
        self.assertEqual(p.probability({"a": "yes", "b": 0}), Fraction(1, 4))
        with self.assertRaises(DistributionError):
            p.probability({"a": "yes"})

    def test_converted(self) -> None:
        p = correlated_pair()
        q = p.converted(NumericMode.float)
        self.assertEqual(q.mode, NumericMode.float)
        self.assertAlmostEqual(float(q.table[0, 0]), 0.375)
        self.assertIs(p.converted(NumericMode.exact), p)
        with self.assertRaises(DistributionError):
            q.converted(NumericMode.exact)

    def test_check_names(self) -> None:
        p = correlated_pair()
        self.assertEqual(p.check_names(["b", "a"]), ("a", "b"))
        with self.assertRaises(DistributionError):
            p.check_names(["c"])


class MarginalConditionalTestCase(TestCase):
    def test_marginal(self) -> None:
        m = density.marginal(correlated_pair(), ["a"])
        self.assertEqual(m.names, ("a",))
        self.assertEqual(list(m.table), [Fraction(1, 2), Fraction(1, 2)])

    def test_conditional(self) -> None:
        f = density.conditional(correlated_pair(), ["b"], ["a"])
        self.assertEqual(f.names, ("a", "b"))
        self.assertEqual(f.value({"a": 0, "b": 0}), Fraction(3, 4))
        self.assertEqual(f.value({"a": 1, "b": 0}), Fraction(1, 4))
        self.assertTrue(f.row_defined({"a": 1}))

    def test_zero_rows_are_undefined(self) -> None:
        f = density.conditional(a_never_one(), ["b"], ["a"])
        self.assertFalse(f.row_defined({"a": 1}))
        self.assertEqual(f.value({"a": 1, "b": 0}), 0)
        self.assertEqual(f.value({"a": 0, "b": 1}), Fraction(1, 2))

    def test_overlap(self) -> None:
        with self.assertRaises(DistributionError):
            density.conditional(correlated_pair(), ["a"], ["a"])

    def test_example1_x2_given_x1(self) -> None:
        p = example1_distribution()
        f = density.conditional(p, ["2"], ["1"])
        for x2 in range(8):
            self.assertEqual(f.value({"1": 0, "2": x2}), Fraction(1, 4) if x2 < 4 else 0)
            self.assertEqual(f.value({"1": 5, "2": x2}), Fraction(1, 4) if x2 >= 4 else 0)


class MarkovTestCase(TestCase):
    def test_correlated_pair(self) -> None:
        p = correlated_pair()
        self.assertTrue(density.is_markov_to_dag(p, PDGraph(["a", "b"], [("a", "b")])))
        self.assertFalse(density.is_markov_to_dag(p, PDGraph(["a", "b"])))
        violation = density.markov_violation(p, PDGraph(["a", "b"]))
        assert violation is not None
        self.assertEqual(violation[0], "b")

    def test_independent_pair_is_markov_to_empty_graph(self) -> None:
        p = DiscreteDistribution.uniform(binary("a", "b"))
        self.assertTrue(density.is_markov_to_dag(p, PDGraph(["a", "b"])))

    def test_variables_must_match(self) -> None:
        with self.assertRaises(DistributionError):
            density.is_markov_to_dag(correlated_pair(), PDGraph(["a", "c"]))

    def test_non_dag(self) -> None:
        with self.assertRaises(GraphError):
            density.is_markov_to_dag(correlated_pair(), PDGraph(["a", "b"], [], [("a", "b")]))

    def test_example1_is_compatible_with_both_cpdags(self) -> None:
        p = example1_distribution()
        for g in example1():
            self.assertTrue(density.is_compatible(p, g))
            self.assertTrue(density.is_compatible(p, g, exhaustive=True))

    def test_example1_is_not_markov_to_empty_graph(self) -> None:
        self.assertFalse(density.is_markov_to_dag(example1_distribution(), PDGraph(["1", "2", "3", "4"])))

    def test_example1_total_mass(self) -> None:
        p = example1_distribution()
        self.assertEqual(sum(p.table.ravel(), Fraction(0)), 1)
        self.assertEqual(p.cardinalities, (8, 8, 8, 36))

    def test_factory_densities_are_markov(self) -> None:
        g = sa(EXAMPLE2_G1)
        dag = enumerate_extensions(g)[0]
        for seed in range(5):
            p = DensityFactory(g, arity=2, mode=NumericMode.exact, seed=seed).create()
            self.assertTrue(density.is_markov_to_dag(p, dag))
            q = DensityFactory(g, arity=3, mode=NumericMode.float, seed=seed).create()
            self.assertTrue(density.is_markov_to_dag(q, dag))


class InterventionTestCase(TestCase):
    def test_truncated_factorization(self) -> None:
        p = correlated_pair()
        forward = density.truncated_factorization(p, PDGraph(["a", "b"], [("a", "b")]), {"a": 1})
        self.assertEqual(forward.y_vars, ("b",))
        self.assertEqual(forward.value({"b": 0}), Fraction(1, 4))
        self.assertEqual(forward.value({"b": 1}), Fraction(3, 4))
        backward = density.truncated_factorization(p, PDGraph(["a", "b"], [("b", "a")]), {"a": 1})
        self.assertEqual(list(backward.table), [Fraction(1, 2), Fraction(1, 2)])
        diff = forward.first_difference(backward)
        assert diff is not None
        self.assertEqual(diff, ((("b", 0),), 0.25))
        self.assertEqual(forward.max_difference(backward), 0.25)

    def test_undefined_rows_give_warnings(self) -> None:
        result = density.truncated_factorization(a_never_one(), PDGraph(["a", "b"], [("a", "b")]), {"a": 1})
        self.assertEqual(result.total(), 0)
        self.assertEqual(len(result.warnings), 1)

    def test_formula_on_undefined_row(self) -> None:
        g = sa("nodes a b\na -> b\n")
        f = build_formula(g, IdentQuery(["a"], ["b"]))
        with self.assertRaises(UndefinedRowError) as ctx:
            density.evaluate_formula(f, a_never_one(), {"a": 1})
        self.assertEqual(ctx.exception.row, (("a", 1),))
        self.assertEqual(list(density.evaluate_formula(f, a_never_one(), {"a": 0}).table), [Fraction(1, 2)] * 2)

    def test_formula_needs_the_whole_treatment(self) -> None:
        f = build_formula(sa("nodes a b\na -> b\n"), IdentQuery(["a"], ["b"]))
        with self.assertRaises(DistributionError):
            density.evaluate_formula(f, correlated_pair(), {})

    def test_example1_intervention_leaves_x2_alone(self) -> None:
        p = example1_distribution()
        dag = example1()[1].graph
        result = density.truncated_factorization(p, dag, {"3": "101"}).marginal(["2"])
        self.assertEqual(list(result.table), [Fraction(1, 8)] * 8)
        f = build_formula(example1()[0], IdentQuery(["3"], ["2"]))
        self.assertIsNone(density.evaluate_formula(f, p, {"3": "101"}).first_difference(result))
        reweighted = density.reweight_marginal(p, example1()[1], IdentQuery(["3"], ["2"]), {"3": 5})
        self.assertIsNone(reweighted.first_difference(result))

    def test_formula_matches_every_extension(self) -> None:
        g = example2()[0]
        q = IdentQuery(["4"], ["5"])
        f = build_formula(g, q)
        for seed in range(5):
            p = DensityFactory(g, arity=2, mode=NumericMode.exact, seed=seed).create()
            for state in (0, 1):
                value = density.evaluate_formula(f, p, {"4": state})
                self.assertEqual(value.total(), 1)
                for dag in enumerate_extensions(g):
                    truth = density.truncated_factorization(p, dag, {"4": state}).marginal(["5"])
                    self.assertIsNone(value.first_difference(truth))
                self.assertIsNone(density.reweight_marginal(p, g, q, {"4": state}).first_difference(value))

    def test_float_formula_matches_within_tolerance(self) -> None:
        g = example2()[0]
        q = IdentQuery(["4"], ["5"])
        f = build_formula(g, q)
        p = DensityFactory(g, arity=3, mode=NumericMode.float, seed=1).create()
        value = density.evaluate_formula(f, p, {"4": 2})
        truth = density.truncated_factorization(p, enumerate_extensions(g)[0], {"4": 2}).marginal(["5"])
        self.assertIsNone(value.first_difference(truth, 1e-9))
        self.assertAlmostEqual(float(value.total()), 1.0)

    def test_reweight_without_treated_ancestors(self) -> None:
        p = correlated_pair()
        g = sa("nodes a b\nb -> a\n")
        result = density.reweight_marginal(p, g, IdentQuery(["a"], ["b"]), {"a": 1})
        self.assertEqual(list(result.table), [Fraction(1, 2), Fraction(1, 2)])

    def test_reweight_needs_condition1(self) -> None:
        g = sa("nodes a b\na -- b\n")
        with self.assertRaises(NotIdentifiableError):
            density.reweight_marginal(correlated_pair(), g, IdentQuery(["a"], ["b"]), {"a": 1})

    def test_reweight_with_parentless_treatment(self) -> None:
        p = correlated_pair()
        g = sa("nodes a b\na -> b\n")
        result = density.reweight_marginal(p, g, IdentQuery(["a"], ["b"]), {"a": 1})
        self.assertEqual(list(result.table), [Fraction(1, 4), Fraction(3, 4)])
        q = IdentQuery(["3"], ["2"])
        reweighted = density.reweight_marginal(example1_distribution(), example1()[1], q, {"3": 5})
        self.assertEqual(list(reweighted.table), [Fraction(1, 8)] * 8)

    def test_formulas_of_example2_match_brute_force(self) -> None:
        q = IdentQuery(["4"], ["5"])
        for g in example2():
            f = build_formula(g, q)
            for seed in range(20):
                p = DensityFactory(g, arity=2, mode=NumericMode.exact, seed=seed).create()
                for state in (0, 1):
                    value = density.evaluate_formula(f, p, {"4": state})
                    verdict = brute_force_check(CandidateSet([g]), p, q, {"4": state})
                    self.assertTrue(verdict.all_agree)
                    for truth in verdict.marginals:
                        self.assertIsNone(value.first_difference(truth), f"seed {seed}, x4={state}")

    def test_reweighting_matches_every_extension_on_random_graphs(self) -> None:
        nodes = ["1", "2", "3", "4"]
        graphs = SaMpdagFactory(nodes, edge_probability=0.5, background_probability=0.3, seed=11)
        queries = QueryFactory(nodes, seed=11)
        checked = 0
        for seed in range(40):
            g = graphs.create()
            q = queries.create()
            if not check_condition1(g, q):
                continue
            checked += 1
            p = DensityFactory(g, arity=2, mode=NumericMode.exact, seed=seed).create()
            x = {n: 1 for n in q.x}
            reweighted = density.reweight_marginal(p, g, q, x)
            self.assertIsNone(density.evaluate_formula(build_formula(g, q), p, x).first_difference(reweighted))
            for dag in enumerate_extensions(g):
                truth = density.truncated_factorization(p, dag, x).marginal(q.y)
                self.assertIsNone(reweighted.first_difference(truth), f"seed {seed}: {dag!r}")
        self.assertGreater(checked, 0)

    def test_describe_and_to_dict(self) -> None:
        result = density.truncated_factorization(correlated_pair(), PDGraph(["a", "b"], [("a", "b")]), {"a": 1})
        self.assertEqual(result.describe(), "p(b | do(a=1))\n  0  1/4\n  1  3/4")
        self.assertEqual(
            result.to_dict(),
            {
                "variables": ["b"],
                "x": {"a": 1},
                "mode": "exact",
                "entries": [{"state": [0], "value": "1/4"}, {"state": [1], "value": "3/4"}],
                "warnings": [],
            },
        )


class DistributionFileTestCase(SimidentTestCase):
    def test_dense(self) -> None:
        text = "variable a 2\nvariable b 3 low mid high\ndense:\n1/12 1/12 1/6\n1/6 1/4 1/4\n"
        p = density.parse_distribution(text)
        self.assertEqual(p.probability({"a": 1, "b": "mid"}), Fraction(1, 4))
        self.assertEqual(density.dump_distribution(p), text)

    def test_sparse(self) -> None:
        text = "variable a 2 no yes\nvariable b 2\nsparse:\nno 0 1/2\nyes 1 1/2\n"
        p = density.parse_distribution(text)
        self.assertEqual(p.probability({"a": "yes", "b": 1}), Fraction(1, 2))
        self.assertEqual(p.probability({"a": "yes", "b": 0}), 0)
        self.assertEqual(density.dump_distribution(p), text)

    def test_float_mode(self) -> None:
        p = density.parse_distribution("variable a 2\ndense:\n0.25 0.75\n", mode=NumericMode.float)
        self.assertEqual(p.table.dtype, np.float64)

    def test_not_normalised(self) -> None:
        with self.assertRaises(ParseError) as ctx:
            density.parse_distribution("variable a 2\ndense:\n1/2 1/3\n", "p.dist")
        self.assertEqual(ctx.exception.lineno, 2)

    def test_errors(self) -> None:
        bad = [
            "dense:\n1\n",
            "variable a 2\n",
            "variable a 2\nvariable a 2\ndense:\n1/4 1/4 1/4 1/4\n",
            "variable a two\ndense:\n1/2 1/2\n",
            "variable a 2\nsparse:\n2 1\n",
            "variable a 2\nsparse:\n0 1/2\n0 1/2\n",
            "variable a 2\ndense:\nhalf half\n",
            "variable a 2\ndense:\n1/2 1/2\nsparse:\n",
        ]
        for text in bad:
            with self.assertRaises(ParseError, msg=text):
                density.parse_distribution(text)

    def test_example1_round_trip_through_file(self) -> None:
        p = example1_distribution()
        path = self.write_fixture("example1.dist", density.dump_distribution(p))
        self.assertEqual(density.load_distribution(path), p)

    def test_resolve_assignment(self) -> None:
        p = example1_distribution()
        self.assertEqual(density.resolve_assignment(p, {"3": "101", "4": 0}), {"3": 5, "4": 0})
