"""
Reward maximization over time-frequency allocations.

Every AP i may run up to W_i simultaneous transmissions per slot, so over an
interval it hands out W_i * tau slot-channels. Client j earns R_j(a) for the
allocation a = (a_1..a_N) it receives from the APs, with R_j nondecreasing in
every coordinate. The optimum is a dynamic program over clients and the
remaining budget of every AP.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import serde
import serde.json

from timely import settings

from .errors import BudgetExceeded, InvalidInstance
from .utils import parse_budget

logger = logging.getLogger("solver.rateadapt")

MAX_DENSE_APS = 2
MAX_APS = 3
MONOTONE_TOL = 1e-12


@serde.serde
@dataclass
class BandwidthProfile:
    widths: List[int]

    def __post_init__(self):
        if not self.widths:
            raise InvalidInstance("at least one AP is required")
        if any(int(w) != w or w < 1 for w in self.widths):
            raise InvalidInstance(f"widths must be positive integers, got {self.widths}")

    def shape(self, tau) -> tuple:
        return tuple(w * tau + 1 for w in self.widths)


class RewardTensor:
    """
    Rewards of every client. Dense arrays for up to two APs; with three APs a
    callable evaluator(j, allocation) is materialized one client at a time.
    """

    def __init__(self, arrays=None, evaluator: Optional[Callable] = None, n_clients=None):
        if (arrays is None) == (evaluator is None):
            raise InvalidInstance("reward tensor needs either dense arrays or an evaluator")
        self.arrays = None if arrays is None else [np.asarray(a, dtype=float) for a in arrays]
        self.evaluator = evaluator
        self.n_clients = len(self.arrays) if self.arrays is not None else n_clients
        if self.n_clients is None:
            raise InvalidInstance("client count is required with an evaluator")

    def client(self, j, shape) -> np.ndarray:
        if self.arrays is not None:
            table = self.arrays[j]
            if table.size != math.prod(shape):
                raise InvalidInstance(f"rewards of client {j} have {table.size} entries, expected {math.prod(shape)}")
            table = table.reshape(shape)
        else:
            table = np.zeros(shape)
            for allocation in itertools.product(*[range(s) for s in shape]):
                table[allocation] = self.evaluator(j, allocation)

        if table.shape != shape:
            raise InvalidInstance(f"rewards of client {j} have shape {table.shape}, expected {shape}")
        if table.flat[0] != 0:
            raise InvalidInstance(f"client {j} earns {table.flat[0]} with no allocation")
        if np.any(table < 0):
            raise InvalidInstance(f"rewards of client {j} must be nonnegative")
        for axis in range(table.ndim):
            if np.any(np.diff(table, axis=axis) < -MONOTONE_TOL):
                raise InvalidInstance(f"rewards of client {j} decrease along AP {axis}")
        return table


@serde.serde
@dataclass
class RewardSolution:
    value: float
    allocation: List[List[int]]
    evaluations: int = 0


@serde.serde
@dataclass
class RewardFile:
    widths: List[int]
    tau: int
    rewards: List[List[float]] = field(default_factory=list)


def check_dimensions(rewards: RewardTensor, widths: BandwidthProfile, tau):
    if tau < 0:
        raise InvalidInstance(f"tau must be nonnegative, got {tau}")
    if len(widths.widths) > MAX_APS:
        raise InvalidInstance(f"{len(widths.widths)} APs are not supported, at most {MAX_APS}")
    if rewards.arrays is not None and len(widths.widths) > MAX_DENSE_APS:
        raise InvalidInstance("three APs need an evaluator, not dense arrays")


def shifted(shape, allocation):
    """Index slices pairing budget t with t - allocation."""
    target = tuple(slice(a, s) for a, s in zip(allocation, shape))
    source = tuple(slice(0, s - a) for a, s in zip(allocation, shape))
    return target, source


def solve_reward_dp(rewards: RewardTensor, widths: BandwidthProfile, tau, budget=None) -> RewardSolution:
    check_dimensions(rewards, widths, tau)
    shape = widths.shape(tau)
    m = rewards.n_clients
    states = math.prod(shape)
    if budget is None:
        budget = parse_budget(settings.TT_REWARD_STATE_BUDGET)
    if states * (m + 1) > budget:
        raise BudgetExceeded("reward DP states", states * (m + 1), budget)

    allocations = list(itertools.product(*[range(s) for s in shape]))
    best = np.zeros(shape)
    choices = []
    evaluations = 0
    for j in range(m):
        table = rewards.client(j, shape)
        following = np.full(shape, -np.inf)
        choice = np.zeros(shape, dtype=np.int64)
        for k, allocation in enumerate(allocations):
            target, source = shifted(shape, allocation)
            candidate = best[source] + table[allocation]
            evaluations += candidate.size
            # strict improvement keeps the lexicographically smallest allocation
            better = candidate > following[target]
            following[target] = np.where(better, candidate, following[target])
            choice[target] = np.where(better, k, choice[target])
        best = following
        choices.append(choice)

    remaining = tuple(s - 1 for s in shape)
    allocation = [[0] * len(shape) for _ in range(m)]
    for j in range(m - 1, -1, -1):
        a = allocations[choices[j][remaining]]
        allocation[j] = list(a)
        remaining = tuple(r - x for r, x in zip(remaining, a))

    value = float(best[tuple(s - 1 for s in shape)])
    logger.debug(f"reward DP over {states} budgets and {m} clients, {evaluations} evaluations")
    return RewardSolution(value=value, allocation=allocation, evaluations=evaluations)


def brute_force_reward(rewards: RewardTensor, widths: BandwidthProfile, tau, budget=None) -> float:
    check_dimensions(rewards, widths, tau)
    shape = widths.shape(tau)
    m = rewards.n_clients
    if budget is None:
        budget = parse_budget(settings.TT_BRUTE_FORCE_REWARD_BUDGET)
    needed = math.prod(shape) ** m
    if needed > budget:
        raise BudgetExceeded("reward allocation enumeration", needed, budget)

    tables = [rewards.client(j, shape) for j in range(m)]
    capacity = [s - 1 for s in shape]
    allocations = list(itertools.product(*[range(s) for s in shape]))

    def search(j, remaining) -> float:
        if j == m:
            return 0.0
        value = 0.0
        for a in allocations:
            if all(x <= r for x, r in zip(a, remaining)):
                rest = [r - x for r, x in zip(remaining, a)]
                value = max(value, tables[j][a] + search(j + 1, rest))
        return value

    return float(search(0, capacity))


def binary_rewards(sizes, tau) -> RewardTensor:
    """Single AP, single width: client j earns 1 once it holds ceil(size_j) slots."""
    arrays = []
    for size in sizes:
        table = np.zeros(tau + 1)
        if not math.isinf(size):
            need = math.ceil(size - 1e-9)
            table[min(need, tau + 1):] = 1.0
        arrays.append(table)
    return RewardTensor(arrays=arrays)


def load_rewards(path) -> tuple:
    """Reads a reward file; returns (RewardTensor, BandwidthProfile, tau)."""
    with open(path) as f:
        data = serde.json.from_json(RewardFile, f.read())
    widths = BandwidthProfile(widths=data.widths)
    return RewardTensor(arrays=data.rewards), widths, data.tau
