import math
import unittest

from solver import rng
from solver.errors import InvalidInstance
from solver.exact import Search, exact_capacity, expected_deliveries
from solver.model import build_instance, generate_geometric_instance
from solver.relax import solve_gap_exact
from solver.simulate import FsmcSpec, FsmcState
from solver.verify import (bound_report, capacity_bounds, check_tight_lower, check_tight_upper, equal_prob_gap,
                           fsmc_gap_report, gap_policy_check, gap_report, lemma_bounds_check,
                           rounded_policy_check, sum_bound_holds, tight_lower_instance, tight_upper_instance)

FOOTNOTE = [[0.5, 0.5], [0.5, 0.5]]


class TestGapReport(unittest.TestCase):
    def test_footnote(self):
        report = gap_report(build_instance(2, 2, 1, FOOTNOTE))
        self.assertEqual(report.c_t3, 1.0)
        self.assertEqual(report.c_det, 0.0)
        self.assertAlmostEqual(report.lower_bound, -2.0, places=12)
        self.assertEqual(report.upper_bound, 2.0)
        self.assertTrue(report.satisfied)

    def test_certain_channels(self):
        report = gap_report(build_instance(2, 10, 3, [[1.0] * 10, [1.0] * 10]), instance_id='ones')
        self.assertEqual(report.c_t3, 6.0)
        self.assertEqual(report.c_det, 6.0)
        self.assertTrue(report.satisfied)
        self.assertEqual(report.as_row()['instance_id'], 'ones')

    def test_violations(self):
        lower, upper = capacity_bounds(4.0, 2)
        self.assertAlmostEqual(lower, 4.0 - 2 * math.sqrt(2 * 4.5), places=12)
        self.assertEqual(upper, 6.0)
        self.assertFalse(bound_report(6.5, 4.0, 2).upper_ok)
        self.assertFalse(bound_report(-2.0, 4.0, 2).lower_ok)
        self.assertTrue(bound_report(5.9, 4.0, 2).upper_ok)

    def test_bounds_are_strict(self):
        lower, upper = capacity_bounds(4.0, 2)
        at_upper = bound_report(upper, 4.0, 2)
        self.assertFalse(at_upper.upper_ok)
        self.assertFalse(at_upper.satisfied)
        at_lower = bound_report(lower, 4.0, 2)
        self.assertFalse(at_lower.lower_ok)
        self.assertFalse(at_lower.satisfied)
        self.assertFalse(bound_report(upper - 1e-12, 4.0, 2).upper_ok)
        self.assertTrue(bound_report(lower + 1e-6, 4.0, 2).lower_ok)

    def test_weighted_bounds(self):
        generator = rng.generator(51, rng.PROPERTY)
        for _ in range(100):
            m = int(generator.integers(1, 7))
            instance = build_instance(2, m, int(generator.integers(1, 7)),
                                      generator.uniform(0.05, 1.0, (2, m)).tolist(),
                                      generator.uniform(1.0, 5.0, m).tolist())
            report = gap_report(instance)
            self.assertTrue(report.satisfied, report)

    def test_fsmc(self):
        fsmc = FsmcSpec(states=[FsmcState(demand=[1, 1], success=FOOTNOTE),
                                FsmcState(demand=[2, 1], success=[[0.9, 0.4], [0.3, 0.8]])],
                        transition=[[0.5, 0.5], [0.25, 0.75]])
        report = fsmc_gap_report(fsmc, 3)
        self.assertTrue(report.satisfied)


class TestTightness(unittest.TestCase):
    def test_upper_construction(self):
        instance = tight_upper_instance(2, 4, 0.5, tau=8)
        self.assertEqual(instance.n_clients, 16)
        self.assertAlmostEqual(instance.success[0][0], 5.5 / 16, places=15)
        report = check_tight_upper(instance, 4, 0.5)
        self.assertEqual(report.c_det, 4.0)
        self.assertAlmostEqual(report.gap, 1.5, places=6)

    def test_upper_invalid(self):
        with self.assertRaises(InvalidInstance):
            tight_upper_instance(2, 4, 2.0)
        with self.assertRaises(InvalidInstance):
            tight_upper_instance(2, 3, 0.5)

    def test_lower_single_ap(self):
        instance, gap = tight_lower_instance(1, 2)
        self.assertEqual(instance.tau, 4)
        self.assertAlmostEqual(gap, 0.375, places=12)
        self.assertAlmostEqual(check_tight_lower(instance, gap, 2), 0.375, places=12)
        self.assertAlmostEqual(solve_gap_exact(instance).objective - exact_capacity(instance).value, 0.375,
                               places=12)

    def test_lower_two_aps(self):
        instance, gap = tight_lower_instance(2, 4)
        self.assertAlmostEqual(gap, 0.75, places=12)
        self.assertAlmostEqual(exact_capacity(instance).value, 3.25, places=12)
        self.assertAlmostEqual(check_tight_lower(instance, gap, 4), 0.75, places=12)

    def test_lower_invalid(self):
        with self.assertRaises(InvalidInstance):
            tight_lower_instance(2, 0)
        with self.assertRaises(InvalidInstance):
            tight_lower_instance(2, 4, tau=1)


class TestSingleApBounds(unittest.TestCase):
    def test_examples(self):
        check = lemma_bounds_check([0.5, 0.5], 4)
        self.assertEqual(check.l, 2)
        self.assertAlmostEqual(check.expected, 1.625, places=12)
        self.assertTrue(check.within)

        check = lemma_bounds_check([1.0, 1.0, 1.0], 2)
        self.assertEqual(check.l, 2)
        self.assertEqual(check.expected, 2.0)
        self.assertTrue(check.within)

    def test_random_lists(self):
        generator = rng.generator(52, rng.PROPERTY)
        for k in range(1000):
            q = int(generator.integers(1, 13))
            tau = int(generator.integers(1, 21))
            probs = generator.uniform(0.01, 1.0, q).tolist()
            weights = generator.uniform(1.0, 4.0, q).tolist() if k % 4 == 0 else None
            check = lemma_bounds_check(probs, tau, weights)
            self.assertTrue(check.within, (probs, tau, check))
            self.assertTrue(check.sum_bound)

    def test_equal_probabilities(self):
        for tau in range(2, 21):
            for l in range(1, tau):
                p = l / tau
                exact = l - expected_deliveries([p] * l, tau)
                self.assertAlmostEqual(exact, equal_prob_gap(p, tau, l), delta=1e-10)

    def test_sum_bound(self):
        for l in range(1, 500):
            self.assertTrue(sum_bound_holds(l))


class TestPolicyBounds(unittest.TestCase):
    def test_relaxation_policies(self):
        checked = 0
        for seed in range(8):
            instance, _ = generate_geometric_instance(seed, 10, 15)
            for check in [gap_policy_check(instance), rounded_policy_check(instance, Search.BRANCH_AND_BOUND)]:
                self.assertTrue(check.ok, check)
                checked += check.applicable
        self.assertGreater(checked, 0)


if __name__ == '__main__':
    unittest.main()
