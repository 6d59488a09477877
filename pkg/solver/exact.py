"""
Exact evaluation of greedy static policies and exact C_T3.

A greedy static policy splits the clients among the APs once and lets every
AP serve its clients persistently, best channel first. Every quantity here is
computed from the exact law of the number of in-deadline deliveries, never by
sampling.
"""

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import serde
from scipy.signal import lfilter

from timely import settings

from .errors import BudgetExceeded, InvalidInstance
from .model import UNSERVED, Instance, Partition, greedy_sorted
from .utils import parse_budget

logger = logging.getLogger("solver.exact")


class Search(enum.Enum):
    EXHAUSTIVE = 'exhaustive'
    BRANCH_AND_BOUND = 'bnb'


@serde.serde
@dataclass
class DeliveryDistribution:
    probs: List[float]

    @property
    def completion(self) -> np.ndarray:
        """completion[k] = Pr(Y >= k) for k = 0..q."""
        return np.cumsum(np.asarray(self.probs)[::-1])[::-1]

    def mean(self, weights=None) -> float:
        completion = self.completion[1:]
        if weights is None:
            return float(completion.sum())
        return float(np.dot(np.asarray(weights, dtype=float), completion))

    def variance(self, weights=None) -> float:
        probs = np.asarray(self.probs)
        if weights is None:
            values = np.arange(len(probs), dtype=float)
        else:
            values = np.concatenate([[0.0], np.cumsum(np.asarray(weights, dtype=float))])
        mean = float(np.dot(values, probs))
        return float(np.dot(values ** 2, probs) - mean ** 2)


@serde.serde
@dataclass
class CapacityResult:
    value: float
    best_partition: Partition
    per_ap_expected: List[float]
    search: str = Search.EXHAUSTIVE.value
    evaluations: int = 0


def completion_probabilities(ordered_probs, tau) -> np.ndarray:
    """
    c[k] = Pr(G_1 + ... + G_k <= tau) for k = 0..q.

    h holds the pmf of the completion slot of the packets served so far. The
    next packet is pending at slot t with mass a[t] = (1-p) a[t-1] + h[t-1],
    a first order recursion evaluated by lfilter; it completes at t with
    probability p a[t].
    """
    q = len(ordered_probs)
    completion = np.zeros(q + 1)
    completion[0] = 1.0

    h = np.zeros(tau + 1)
    h[0] = 1.0
    for k, p in enumerate(ordered_probs, start=1):
        if p <= 0:
            break
        pending = lfilter([1.0], [1.0, -(1.0 - p)], h[:-1])
        h = np.concatenate([[0.0], p * pending])
        completion[k] = min(1.0, h.sum())
        if completion[k] == 0:
            break
    return completion


def delivery_distribution(ordered_probs, tau) -> DeliveryDistribution:
    completion = completion_probabilities(ordered_probs, tau)
    probs = completion - np.append(completion[1:], 0.0)
    return DeliveryDistribution(probs=np.clip(probs, 0.0, 1.0).tolist())


def expected_deliveries(ordered_probs, tau, weights=None) -> float:
    if weights is not None and len(weights) != len(ordered_probs):
        raise InvalidInstance(f"{len(weights)} weights for {len(ordered_probs)} clients")
    completion = completion_probabilities(ordered_probs, tau)[1:]
    if weights is None:
        return float(completion.sum())
    return float(np.dot(np.asarray(weights, dtype=float), completion))


def greedy_order(instance: Instance, ap_index, client_set) -> List[int]:
    if not 0 <= ap_index < instance.n_aps:
        raise InvalidInstance(f"unknown AP {ap_index}")
    for j in client_set:
        if not 0 <= j < instance.n_clients:
            raise InvalidInstance(f"unknown client {j}")
    return greedy_sorted(instance, ap_index, client_set)


def ap_expected(instance: Instance, ap, clients) -> float:
    order = greedy_sorted(instance, ap, clients)
    probs = [instance.success[ap][j] for j in order]
    weights = None
    if instance.weighted:
        weights = [instance.weights[j] for j in order]
    return expected_deliveries(probs, instance.tau, weights)


def per_ap_values(instance: Instance, partition: Partition) -> List[float]:
    members = [[] for _ in range(instance.n_aps)]
    for j, ap in enumerate(partition.owner):
        if ap != UNSERVED:
            members[ap].append(j)
    return [ap_expected(instance, ap, clients) for ap, clients in enumerate(members)]


def evaluate_partition(instance: Instance, partition: Partition) -> float:
    partition.validate(instance)
    return float(sum(per_ap_values(instance, partition)))


def per_client_throughput(instance: Instance, partition: Partition) -> List[float]:
    """Probability that each client's packet is delivered before the deadline."""
    partition.validate(instance)
    throughput = [0.0] * instance.n_clients
    for ap, clients in enumerate(partition.order):
        order = greedy_sorted(instance, ap, clients)
        completion = completion_probabilities([instance.success[ap][j] for j in order], instance.tau)
        for k, j in enumerate(order, start=1):
            throughput[j] = float(completion[k])
    return throughput


def interval_variance(instance: Instance, partition: Partition) -> float:
    """Variance of the (weighted) number of deliveries in a single interval."""
    partition.validate(instance)
    total = 0.0
    for ap, clients in enumerate(partition.order):
        order = greedy_sorted(instance, ap, clients)
        dist = delivery_distribution([instance.success[ap][j] for j in order], instance.tau)
        weights = [instance.weights[j] for j in order] if instance.weighted else None
        total += dist.variance(weights)
    return total


class SubsetValues:
    """Memoized greedy value of every (AP, client bitmask) pair."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.cache = {}
        self.evaluations = 0

    def __call__(self, ap, mask) -> float:
        key = (ap, mask)
        if key not in self.cache:
            clients = [j for j in range(self.instance.n_clients) if mask >> j & 1]
            self.cache[key] = ap_expected(self.instance, ap, clients)
            self.evaluations += 1
        return self.cache[key]


def capacity_result(instance: Instance, owner, values: SubsetValues, search: Search) -> CapacityResult:
    partition = Partition.from_owner(instance, owner)
    per_ap = per_ap_values(instance, partition)
    return CapacityResult(value=float(sum(per_ap)), best_partition=partition, per_ap_expected=per_ap,
                          search=search.value, evaluations=values.evaluations)


def exhaustive_search(instance: Instance, budget) -> CapacityResult:
    n, m = instance.n_aps, instance.n_clients
    needed = n ** m
    if needed > budget:
        raise BudgetExceeded("exhaustive partition search", needed, budget)

    values = SubsetValues(instance)
    best_value = -1.0
    best_owner = None
    for owner in itertools.product(range(n), repeat=m):
        masks = [0] * n
        for j, ap in enumerate(owner):
            masks[ap] |= 1 << j
        value = sum(values(ap, mask) for ap, mask in enumerate(masks))
        if value > best_value + 1e-15:
            best_value = value
            best_owner = owner

    logger.debug(f"exhaustive search over {needed} partitions, {values.evaluations} subset evaluations")
    return capacity_result(instance, best_owner, values, Search.EXHAUSTIVE)


class BranchAndBound:
    """
    Depth-first search over client-to-AP assignments.

    Clients are branched in order of their best channel. The bound of a node
    is the smaller of two admissible estimates: the current value plus, for
    every unassigned client, the most it can add when served first on its
    best AP, and the per-AP cap of tau slots each delivering at most the best
    w_j p_ij among the clients the AP may still receive.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.values = SubsetValues(instance)
        n, m, tau = instance.n_aps, instance.n_clients, instance.tau
        p = instance.p
        w = instance.w

        self.clients = sorted(range(m), key=lambda j: (-p[:, j].max(), j))
        gain = w[None, :] * (1.0 - (1.0 - p) ** tau)
        best_gain = gain.max(axis=0)
        order_gain = np.array([best_gain[j] for j in self.clients])
        self.remaining_gain = np.append(np.cumsum(order_gain[::-1])[::-1], 0.0)

        rate = w[None, :] * p
        ordered_rate = rate[:, self.clients] if m else np.zeros((n, 0))
        suffix = np.zeros((n, m + 1))
        for k in range(m - 1, -1, -1):
            suffix[:, k] = np.maximum(suffix[:, k + 1], ordered_rate[:, k])
        self.remaining_rate = suffix
        self.rate = rate

        self.best_value = -1.0
        self.best_owner = None
        self.nodes = 0

    def solve(self) -> CapacityResult:
        n = self.instance.n_aps
        owner = [UNSERVED] * self.instance.n_clients
        self.visit(0, [0] * n, [0.0] * n, [0.0] * n, owner)
        logger.debug(f"branch and bound visited {self.nodes} nodes, {self.values.evaluations} subset evaluations")
        return capacity_result(self.instance, self.best_owner, self.values, Search.BRANCH_AND_BOUND)

    def visit(self, depth, masks, current, assigned_rate, owner):
        self.nodes += 1
        tau = self.instance.tau
        total = sum(current)

        if depth == len(self.clients):
            if total > self.best_value + 1e-15:
                self.best_value = total
                self.best_owner = list(owner)
            return

        additive = total + self.remaining_gain[depth]
        capped = sum(tau * max(assigned_rate[i], self.remaining_rate[i, depth]) for i in range(len(masks)))
        if min(additive, capped) <= self.best_value + 1e-12:
            return

        j = self.clients[depth]
        for ap in sorted(range(len(masks)), key=lambda i: (-self.rate[i, j], i)):
            previous = (masks[ap], current[ap], assigned_rate[ap])
            masks[ap] |= 1 << j
            current[ap] = self.values(ap, masks[ap])
            assigned_rate[ap] = max(assigned_rate[ap], self.rate[ap, j])
            owner[j] = ap

            self.visit(depth + 1, masks, current, assigned_rate, owner)

            masks[ap], current[ap], assigned_rate[ap] = previous
            owner[j] = UNSERVED


def exact_capacity(instance: Instance, search=Search.EXHAUSTIVE, budget=None) -> CapacityResult:
    search = Search(search)
    if instance.empty:
        return CapacityResult(value=0.0, best_partition=Partition(owner=[], order=[[] for _ in range(instance.n_aps)]),
                              per_ap_expected=[0.0] * instance.n_aps, search=search.value)

    if search == Search.EXHAUSTIVE:
        if budget is None:
            budget = parse_budget(settings.TT_EXHAUSTIVE_BUDGET)
        return exhaustive_search(instance, budget)
    return BranchAndBound(instance).solve()
