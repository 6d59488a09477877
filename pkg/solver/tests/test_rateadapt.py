import os
import tempfile
import unittest

import numpy as np
import serde.json

from solver import rng
from solver.errors import BudgetExceeded, InvalidInstance
from solver.rateadapt import (BandwidthProfile, RewardFile, RewardTensor, binary_rewards, brute_force_reward,
                              load_rewards, solve_reward_dp)
from solver.relax import pack_count


def monotone_table(generator, shape):
    table = generator.integers(0, 5, shape)
    for axis in range(len(shape)):
        table = table.cumsum(axis=axis)
    return (table - table.flat[0]).astype(float)


class TestRewardDp(unittest.TestCase):
    def test_two_clients(self):
        rewards = RewardTensor(arrays=[[0, 1, 1.5], [0, 1, 1.2]])
        solution = solve_reward_dp(rewards, BandwidthProfile(widths=[1]), 2)
        self.assertEqual(solution.value, 2.0)
        self.assertEqual(solution.allocation, [[1], [1]])

    def test_single_client(self):
        rewards = RewardTensor(arrays=[[0, 0.5, 0.7, 2.0]])
        solution = solve_reward_dp(rewards, BandwidthProfile(widths=[3]), 1)
        self.assertEqual(solution.value, 2.0)
        self.assertEqual(solution.allocation, [[3]])

    def test_zero_rewards(self):
        rewards = RewardTensor(arrays=[np.zeros(5), np.zeros(5)])
        solution = solve_reward_dp(rewards, BandwidthProfile(widths=[2]), 2)
        self.assertEqual(solution.value, 0.0)
        self.assertEqual(solution.allocation, [[0], [0]])

    def test_no_slots(self):
        rewards = RewardTensor(arrays=[[0.0], [0.0]])
        self.assertEqual(solve_reward_dp(rewards, BandwidthProfile(widths=[1]), 0).value, 0.0)
        self.assertEqual(brute_force_reward(rewards, BandwidthProfile(widths=[1]), 0), 0.0)

    def test_allocation_respects_budget(self):
        generator = rng.generator(41, rng.PROPERTY)
        widths = BandwidthProfile(widths=[2, 1])
        shape = widths.shape(2)
        rewards = RewardTensor(arrays=[monotone_table(generator, shape) for _ in range(3)])
        solution = solve_reward_dp(rewards, widths, 2)
        totals = np.asarray(solution.allocation).sum(axis=0)
        self.assertLessEqual(totals[0], 4)
        self.assertLessEqual(totals[1], 2)
        earned = sum(rewards.client(j, shape)[tuple(a)] for j, a in enumerate(solution.allocation))
        self.assertAlmostEqual(earned, solution.value, places=9)

    def test_matches_brute_force(self):
        generator = rng.generator(42, rng.PROPERTY)
        for k in range(50):
            n = 1 + k % 2
            widths = BandwidthProfile(widths=generator.integers(1, 3, n).tolist())
            tau = int(generator.integers(1, 3))
            m = int(generator.integers(1, 5 if n == 1 else 4))
            shape = widths.shape(tau)
            rewards = RewardTensor(arrays=[monotone_table(generator, shape) for _ in range(m)])
            self.assertEqual(solve_reward_dp(rewards, widths, tau).value, brute_force_reward(rewards, widths, tau))

    def test_evaluator(self):
        rewards = RewardTensor(evaluator=lambda j, a: float(min(sum(a), 2) * (j + 1)), n_clients=2)
        widths = BandwidthProfile(widths=[1, 1, 1])
        solution = solve_reward_dp(rewards, widths, 1)
        self.assertEqual(solution.value, 5.0)
        self.assertEqual(solution.value, brute_force_reward(rewards, widths, 1))

    def test_evaluation_count(self):
        sizes = [1.0, 2.0, 3.0]
        tau = 5
        solution = solve_reward_dp(binary_rewards(sizes, tau), BandwidthProfile(widths=[1]), tau)
        s = tau + 1
        self.assertEqual(solution.evaluations, len(sizes) * s * (s + 1) // 2)
        self.assertLessEqual(solution.evaluations, len(sizes) * s ** 2)

    def test_more_slots_help(self):
        generator = rng.generator(43, rng.PROPERTY)
        widths = BandwidthProfile(widths=[1])
        tables = [np.sort(generator.uniform(0, 1, 8)) for _ in range(3)]
        values = []
        for tau in range(0, 8):
            arrays = [t[:tau + 1] - t[0] for t in tables]
            values.append(solve_reward_dp(RewardTensor(arrays=arrays), widths, tau).value)
        for shorter, longer in zip(values, values[1:]):
            self.assertLessEqual(shorter, longer + 1e-12)


class TestBinaryReduction(unittest.TestCase):
    def test_matches_pack_count(self):
        generator = rng.generator(44, rng.PROPERTY)
        for _ in range(50):
            sizes = generator.integers(1, 7, int(generator.integers(1, 7))).astype(float).tolist()
            tau = int(generator.integers(1, 13))
            solution = solve_reward_dp(binary_rewards(sizes, tau), BandwidthProfile(widths=[1]), tau)
            self.assertEqual(solution.value, pack_count(sorted(sizes), tau))

    def test_never_fits(self):
        rewards = binary_rewards([float('inf'), 2.0], 3)
        self.assertEqual(solve_reward_dp(rewards, BandwidthProfile(widths=[1]), 3).value, 1.0)


class TestValidation(unittest.TestCase):
    def test_widths(self):
        with self.assertRaises(InvalidInstance):
            BandwidthProfile(widths=[])
        with self.assertRaises(InvalidInstance):
            BandwidthProfile(widths=[0])

    def test_rewards(self):
        widths = BandwidthProfile(widths=[1])
        with self.assertRaises(InvalidInstance):
            solve_reward_dp(RewardTensor(arrays=[[0, 2, 1]]), widths, 2)
        with self.assertRaises(InvalidInstance):
            solve_reward_dp(RewardTensor(arrays=[[1, 2, 3]]), widths, 2)
        with self.assertRaises(InvalidInstance):
            solve_reward_dp(RewardTensor(arrays=[[0, 1]]), widths, 2)
        with self.assertRaises(InvalidInstance):
            solve_reward_dp(RewardTensor(arrays=[[0, 1, 2]]), widths, -1)
        with self.assertRaises(InvalidInstance):
            RewardTensor()

    def test_dense_three_aps(self):
        with self.assertRaises(InvalidInstance):
            solve_reward_dp(RewardTensor(arrays=[np.zeros(8)]), BandwidthProfile(widths=[1, 1, 1]), 1)

    def test_budget(self):
        rewards = RewardTensor(arrays=[np.arange(11.0)] * 3)
        with self.assertRaises(BudgetExceeded):
            solve_reward_dp(rewards, BandwidthProfile(widths=[1]), 10, budget=10)
        with self.assertRaises(BudgetExceeded):
            brute_force_reward(rewards, BandwidthProfile(widths=[1]), 10, budget=1000)


class TestRewardFile(unittest.TestCase):
    def test_load(self):
        data = RewardFile(widths=[1], tau=2, rewards=[[0, 1, 1.5], [0, 1, 1.2]])
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, 'rewards.json')
            with open(path, 'w') as f:
                f.write(serde.json.to_json(data))
            rewards, widths, tau = load_rewards(path)
        self.assertEqual(tau, 2)
        self.assertEqual(solve_reward_dp(rewards, widths, tau).value, 2.0)


if __name__ == '__main__':
    unittest.main()
