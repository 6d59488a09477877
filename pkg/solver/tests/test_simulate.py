import math
import unittest

from solver.errors import InvalidInstance
from solver.exact import exact_capacity, interval_variance
from solver.model import Partition, build_instance
from solver.simulate import (FsmcSpec, FsmcState, fsmc_capacity, optimal_partitions, simulate_fsmc,
                             simulate_static, stationary_distribution, validate_fsmc)

FOOTNOTE = [[0.5, 0.5], [0.5, 0.5]]


class TestSimulateStatic(unittest.TestCase):
    def setUp(self):
        self.instance = build_instance(2, 2, 1, FOOTNOTE)
        self.partition = Partition.from_owner(self.instance, [0, 1])

    def test_converges_to_exact(self):
        intervals = 100000
        metrics = simulate_static(self.instance, self.partition, intervals, 42)
        sigma = math.sqrt(interval_variance(self.instance, self.partition))
        self.assertAlmostEqual(sigma, math.sqrt(0.5), places=12)
        self.assertLessEqual(abs(metrics.t3_estimate - 1.0), 3 * sigma / math.sqrt(intervals))
        self.assertEqual(metrics.intervals_run, intervals)

    def test_reproducible(self):
        first = simulate_static(self.instance, self.partition, 500, 7)
        second = simulate_static(self.instance, self.partition, 500, 7)
        other = simulate_static(self.instance, self.partition, 500, 8)
        self.assertEqual(first, second)
        self.assertNotEqual(first.per_client_delivered, other.per_client_delivered)

    def test_split_and_merge(self):
        whole = simulate_static(self.instance, self.partition, 1000, 9)
        head = simulate_static(self.instance, self.partition, 400, 9)
        tail = simulate_static(self.instance, self.partition, 600, 9, start=400)
        merged = head.merge(tail)
        self.assertEqual(merged.per_client_delivered, whole.per_client_delivered)
        self.assertEqual(merged.sum_total, whole.sum_total)
        self.assertAlmostEqual(merged.t3_estimate, whole.t3_estimate, places=12)

    def test_certain_channels(self):
        instance = build_instance(2, 10, 3, [[1.0] * 10, [1.0] * 10])
        partition = exact_capacity(instance).best_partition
        metrics = simulate_static(instance, partition, 50, 1)
        self.assertEqual(metrics.t3_estimate, 6.0)
        self.assertEqual(metrics.std_error, 0.0)

    def test_weighted_estimate(self):
        instance = build_instance(2, 2, 1, [[1.0, 0.0], [0.0, 1.0]], weights=[2.0, 3.0])
        metrics = simulate_static(instance, Partition.from_owner(instance, [0, 1]), 10, 1)
        self.assertEqual(metrics.t3_estimate, 2.0)
        self.assertEqual(metrics.weighted_estimate, 5.0)

    def test_invalid(self):
        with self.assertRaises(InvalidInstance):
            simulate_static(self.instance, self.partition, 0, 1)
        with self.assertRaises(InvalidInstance):
            simulate_static(self.instance, Partition(owner=[0], order=[[0], []]), 10, 1)


def two_state_chain(transition=None):
    return FsmcSpec(
        states=[FsmcState(demand=[1, 1], success=FOOTNOTE),
                FsmcState(demand=[0, 0], success=FOOTNOTE)],
        transition=transition or [[0.9, 0.1], [0.5, 0.5]],
    )


class TestFsmc(unittest.TestCase):
    def test_stationary(self):
        pi = stationary_distribution([[0.9, 0.1], [0.5, 0.5]])
        self.assertAlmostEqual(pi[0], 5 / 6, places=10)
        self.assertAlmostEqual(pi[1], 1 / 6, places=10)

    def test_validate(self):
        validate_fsmc(two_state_chain())
        with self.assertRaises(InvalidInstance):
            validate_fsmc(two_state_chain([[1.0, 0.0], [0.0, 1.0]]))
        with self.assertRaises(InvalidInstance):
            validate_fsmc(two_state_chain([[0.8, 0.1], [0.5, 0.5]]))
        with self.assertRaises(InvalidInstance):
            validate_fsmc(FsmcSpec(states=[FsmcState(demand=[1, -1], success=FOOTNOTE)], transition=[[1.0]]))

    def test_capacity(self):
        self.assertAlmostEqual(fsmc_capacity(two_state_chain(), 1), 5 / 6, places=10)

    def test_single_state_matches_static(self):
        fsmc = FsmcSpec(states=[FsmcState(demand=[1, 1], success=FOOTNOTE)], transition=[[1.0]])
        instance = build_instance(2, 2, 1, FOOTNOTE)
        partition = Partition.from_owner(instance, [0, 1])
        chained = simulate_fsmc(fsmc, [partition], 1, 300, 5)
        static = simulate_static(instance, partition, 300, 5)
        self.assertEqual(chained.per_client_delivered, static.per_client_delivered)

    def test_virtual_clients(self):
        fsmc = FsmcSpec(states=[FsmcState(demand=[2, 0], success=[[1.0, 1.0], [1.0, 1.0]])], transition=[[1.0]])
        partitions = optimal_partitions(fsmc, 1)
        metrics = simulate_fsmc(fsmc, partitions, 1, 20, 3)
        self.assertEqual(metrics.per_client_delivered, [40, 0])

    def test_idle_state(self):
        fsmc = two_state_chain()
        partitions = optimal_partitions(fsmc, 1)
        self.assertEqual(partitions[1].owner, [])
        metrics = simulate_fsmc(fsmc, partitions, 1, 2000, 11)
        self.assertLess(metrics.t3_estimate, 1.0)
        with self.assertRaises(InvalidInstance):
            simulate_fsmc(fsmc, partitions[:1], 1, 10, 11)

    def test_converges_to_stationary_average(self):
        fsmc = FsmcSpec(states=[FsmcState(demand=[1, 1], success=FOOTNOTE),
                                FsmcState(demand=[1, 1], success=[[0.8, 0.2], [0.2, 0.8]])],
                        transition=[[0.5, 0.5], [0.5, 0.5]])
        self.assertAlmostEqual(fsmc_capacity(fsmc, 1), (1.0 + 1.6) / 2, places=10)
        metrics = simulate_fsmc(fsmc, optimal_partitions(fsmc, 1), 1, 100000, 21)
        self.assertLess(abs(metrics.t3_estimate - fsmc_capacity(fsmc, 1)), 0.02 * fsmc_capacity(fsmc, 1))

    def test_zero_demand_state_delivers_nothing(self):
        certain = [[1.0, 1.0], [1.0, 1.0]]
        fsmc = FsmcSpec(states=[FsmcState(demand=[1, 1], success=certain),
                                FsmcState(demand=[0, 0], success=certain)],
                        transition=[[0.5, 0.5], [0.5, 0.5]])
        self.assertAlmostEqual(fsmc_capacity(fsmc, 1), 1.0, places=10)
        metrics = simulate_fsmc(fsmc, optimal_partitions(fsmc, 1), 1, 20000, 22)
        # every busy interval delivers both clients, idle intervals deliver none
        self.assertEqual(metrics.per_client_delivered[0], metrics.per_client_delivered[1])
        self.assertLess(metrics.t3_estimate, 1.05)
        self.assertGreater(metrics.t3_estimate, 0.95)


if __name__ == '__main__':
    unittest.main()
