import itertools
import unittest

from solver import rng
from solver.errors import BudgetExceeded, InvalidInstance
from solver.exact import (Search, completion_probabilities, delivery_distribution, evaluate_partition,
                          exact_capacity, expected_deliveries, greedy_order, interval_variance,
                          per_client_throughput)
from solver.model import Partition, build_instance, empty_instance

FOOTNOTE = [[0.5, 0.5], [0.5, 0.5]]


def random_instance(generator, n_aps, n_clients, tau, weighted=False):
    success = generator.uniform(0.05, 1.0, (n_aps, n_clients)).tolist()
    weights = generator.uniform(1.0, 5.0, n_clients).tolist() if weighted else None
    return build_instance(n_aps, n_clients, tau, success, weights)


class TestExpectedDeliveries(unittest.TestCase):
    def test_two_fair_coins(self):
        self.assertAlmostEqual(expected_deliveries([0.5, 0.5], 4), 1.625, places=12)
        completion = completion_probabilities([0.5, 0.5], 4)
        self.assertAlmostEqual(completion[1], 0.9375, places=12)
        self.assertAlmostEqual(completion[2], 0.6875, places=12)

    def test_certain_channels(self):
        self.assertEqual(expected_deliveries([1.0, 1.0, 1.0], 2), 2.0)
        self.assertEqual(expected_deliveries([], 5), 0.0)

    def test_zero_probability(self):
        self.assertEqual(expected_deliveries([0.0, 0.5], 3), 0.0)

    def test_weights(self):
        self.assertAlmostEqual(expected_deliveries([0.5, 0.5], 4, [2.0, 1.0]), 2 * 0.9375 + 0.6875, places=12)
        with self.assertRaises(InvalidInstance):
            expected_deliveries([0.5, 0.5], 4, [1.0])

    def test_distribution(self):
        generator = rng.generator(11, rng.PROPERTY)
        for _ in range(20):
            probs = generator.uniform(0.05, 1.0, generator.integers(1, 7)).tolist()
            tau = int(generator.integers(1, 12))
            dist = delivery_distribution(probs, tau)
            self.assertAlmostEqual(sum(dist.probs), 1.0, places=12)
            self.assertAlmostEqual(dist.mean(), expected_deliveries(probs, tau), places=12)

    def test_greedy_order_is_optimal(self):
        generator = rng.generator(12, rng.PROPERTY)
        for k in range(100):
            q = int(generator.integers(1, 7))
            tau = int(generator.integers(1, 10))
            probs = generator.uniform(0.05, 1.0, q)
            weights = generator.uniform(1.0, 5.0, q) if k % 2 else [1.0] * q
            order = sorted(range(q), key=lambda j: (-weights[j] * probs[j], j))
            greedy = expected_deliveries([probs[j] for j in order], tau, [weights[j] for j in order])
            for perm in itertools.permutations(range(q)):
                value = expected_deliveries([probs[j] for j in perm], tau, [weights[j] for j in perm])
                self.assertLessEqual(value, greedy + 1e-12)


class TestPartitions(unittest.TestCase):
    def test_greedy_order(self):
        instance = build_instance(1, 3, 2, [[0.2, 0.9, 0.5]])
        self.assertEqual(greedy_order(instance, 0, [0, 1, 2]), [1, 2, 0])
        self.assertEqual(greedy_order(instance.with_weights([5, 1, 1]), 0, [0, 1, 2]), [0, 1, 2])
        with self.assertRaises(InvalidInstance):
            greedy_order(instance, 1, [0])
        with self.assertRaises(InvalidInstance):
            greedy_order(instance, 0, [3])

    def test_evaluate_footnote(self):
        instance = build_instance(2, 2, 1, FOOTNOTE)
        self.assertEqual(evaluate_partition(instance, Partition.from_owner(instance, [0, 0])), 0.5)
        self.assertEqual(evaluate_partition(instance, Partition.from_owner(instance, [0, 1])), 1.0)
        self.assertEqual(evaluate_partition(instance, Partition.unserved(instance)), 0.0)

    def test_per_client(self):
        generator = rng.generator(13, rng.PROPERTY)
        instance = random_instance(generator, 2, 5, 4)
        partition = Partition.from_owner(instance, [0, 1, 0, 1, -1])
        throughput = per_client_throughput(instance, partition)
        self.assertEqual(throughput[4], 0.0)
        self.assertAlmostEqual(sum(throughput), evaluate_partition(instance, partition), places=12)

    def test_variance(self):
        instance = build_instance(2, 2, 1, FOOTNOTE)
        self.assertAlmostEqual(interval_variance(instance, Partition.from_owner(instance, [0, 1])), 0.5, places=12)
        self.assertAlmostEqual(interval_variance(instance, Partition.from_owner(instance, [0, 0])), 0.25, places=12)


class TestExactCapacity(unittest.TestCase):
    def test_footnote(self):
        instance = build_instance(2, 2, 1, FOOTNOTE)
        for search in Search:
            result = exact_capacity(instance, search)
            self.assertEqual(result.value, 1.0)
            self.assertEqual(sorted(result.best_partition.owner), [0, 1])
        self.assertEqual(exact_capacity(instance).best_partition.owner, [0, 1])

    def test_certain_channels(self):
        instance = build_instance(2, 10, 3, [[1.0] * 10, [1.0] * 10])
        self.assertEqual(exact_capacity(instance).value, 6.0)
        self.assertEqual(exact_capacity(instance, Search.BRANCH_AND_BOUND).value, 6.0)

    def test_single_client(self):
        instance = build_instance(1, 1, 3, [[0.5]])
        self.assertAlmostEqual(exact_capacity(instance).value, 0.875, places=12)

    def test_empty(self):
        result = exact_capacity(empty_instance(2, 5))
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.per_ap_expected, [0.0, 0.0])

    def test_budget(self):
        instance = build_instance(2, 10, 3, [[0.5] * 10, [0.5] * 10])
        with self.assertRaises(BudgetExceeded):
            exact_capacity(instance, budget=100)

    def test_branch_and_bound_matches_exhaustive(self):
        generator = rng.generator(14, rng.PROPERTY)
        for k in range(30):
            n = 2 if k % 3 else 3
            m = int(generator.integers(1, 8 if n == 2 else 6))
            instance = random_instance(generator, n, m, int(generator.integers(1, 8)), weighted=k % 4 == 0)
            exhaustive = exact_capacity(instance, Search.EXHAUSTIVE)
            bnb = exact_capacity(instance, Search.BRANCH_AND_BOUND)
            self.assertAlmostEqual(exhaustive.value, bnb.value, places=9)
            self.assertAlmostEqual(evaluate_partition(instance, bnb.best_partition), bnb.value, places=12)
            self.assertAlmostEqual(sum(exhaustive.per_ap_expected), exhaustive.value, places=12)

    def test_monotone_in_success(self):
        generator = rng.generator(15, rng.PROPERTY)
        for k in range(30):
            m = int(generator.integers(1, 6))
            instance = random_instance(generator, 2, m, int(generator.integers(1, 6)), weighted=k % 3 == 0)
            i, j = int(generator.integers(0, 2)), int(generator.integers(0, m))
            success = [list(row) for row in instance.success]
            success[i][j] = float(generator.uniform(success[i][j], 1.0))
            raised = build_instance(2, m, instance.tau, success, instance.weights)
            for search in Search:
                self.assertGreaterEqual(exact_capacity(raised, search).value + 1e-12,
                                        exact_capacity(instance, search).value, (k, search))


if __name__ == '__main__':
    unittest.main()
