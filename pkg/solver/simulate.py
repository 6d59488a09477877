"""
Seeded Monte Carlo simulation of interval-by-interval service.

Each interval uses its own Philox substream, so intervals can be simulated in
any order, or split across workers and merged, with identical results.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import networkx as nx
import numpy as np
import scipy.linalg
import serde
import serde.json

from timely import settings

from . import rng
from .errors import InvalidInstance, NumericalFailure
from .exact import Search, exact_capacity
from .model import Instance, Partition, build_instance, virtual_expand, virtual_origins
from .relax import solve_gap_exact

logger = logging.getLogger("solver.simulate")


@serde.serde
@dataclass
class FsmcState:
    demand: List[int]
    success: List[List[float]]


@serde.serde
@dataclass
class FsmcSpec:
    states: List[FsmcState]
    transition: List[List[float]]
    initial: int = 0
    weights: Optional[List[float]] = None

    @property
    def n_aps(self) -> int:
        return len(self.states[0].success)

    @property
    def n_clients(self) -> int:
        return len(self.states[0].demand)

    def state_instance(self, state, tau) -> Instance:
        s = self.states[state]
        return build_instance(self.n_aps, self.n_clients, tau, s.success, self.weights)

    def expanded(self, state, tau) -> Instance:
        return virtual_expand(self.state_instance(state, tau), self.states[state].demand)


@serde.serde
@dataclass
class Metrics:
    intervals_run: int
    per_client_delivered: List[int]
    t3_estimate: float
    weighted_estimate: float
    seed: int
    std_error: float = 0.0
    sum_total: float = 0.0
    sum_squares: float = 0.0
    weights: Optional[List[float]] = None

    @classmethod
    def collect(cls, delivered, totals_sum, totals_squares, intervals, seed, weights=None) -> "Metrics":
        delivered = [int(d) for d in delivered]
        w = np.ones(len(delivered)) if weights is None else np.asarray(weights, dtype=float)
        t3 = sum(delivered) / intervals
        weighted = float(np.dot(w, delivered)) / intervals
        variance = max(0.0, totals_squares / intervals - (totals_sum / intervals) ** 2)
        std_error = math.sqrt(variance / intervals) if intervals > 1 else 0.0
        return cls(intervals_run=intervals, per_client_delivered=delivered, t3_estimate=t3,
                   weighted_estimate=weighted, seed=seed, std_error=std_error, sum_total=float(totals_sum),
                   sum_squares=float(totals_squares), weights=None if weights is None else list(w))

    def merge(self, other: "Metrics") -> "Metrics":
        if self.seed != other.seed or len(self.per_client_delivered) != len(other.per_client_delivered):
            raise InvalidInstance("only metrics of the same seed and client set can be merged")
        delivered = [a + b for a, b in zip(self.per_client_delivered, other.per_client_delivered)]
        return Metrics.collect(delivered, self.sum_total + other.sum_total, self.sum_squares + other.sum_squares,
                               self.intervals_run + other.intervals_run, self.seed, self.weights)


def serve_interval(generator, orders, p, tau):
    """
    Persistent service of each AP's ordered list for one interval. One uniform
    per (AP, slot) decides the packet transmitted in that slot. Yields the
    delivered clients.
    """
    draws = generator.random((len(orders), tau))
    for ap, order in enumerate(orders):
        k = 0
        for t in range(tau):
            if k == len(order):
                break
            if draws[ap, t] < p[ap][order[k]]:
                yield order[k]
                k += 1


def simulate_static(instance: Instance, partition: Partition, intervals, seed, start=0) -> Metrics:
    if intervals < 1:
        raise InvalidInstance(f"intervals must be positive, got {intervals}")
    partition.validate(instance)

    p = instance.success
    w = instance.w
    delivered = np.zeros(instance.n_clients, dtype=np.int64)
    totals_sum = 0.0
    totals_squares = 0.0
    for r in range(start, start + intervals):
        generator = rng.generator(seed, rng.STATIC, r)
        total = 0.0
        for j in serve_interval(generator, partition.order, p, instance.tau):
            delivered[j] += 1
            total += w[j]
        totals_sum += total
        totals_squares += total * total

    metrics = Metrics.collect(delivered, totals_sum, totals_squares, intervals, seed,
                              instance.weights if instance.weighted else None)
    logger.debug(f"simulated {intervals} intervals with seed {seed}: T3 estimate {metrics.t3_estimate:.4f}")
    return metrics


def validate_fsmc(fsmc: FsmcSpec):
    if not fsmc.states:
        raise InvalidInstance("FSMC has no states")
    n_states = len(fsmc.states)
    transition = np.asarray(fsmc.transition, dtype=float)
    if transition.shape != (n_states, n_states):
        raise InvalidInstance(f"transition matrix is {transition.shape}, expected {n_states}x{n_states}")
    if np.any(transition < 0) or np.any(np.abs(transition.sum(axis=1) - 1) > 1e-12):
        raise InvalidInstance("transition rows must be probability vectors")
    if not 0 <= fsmc.initial < n_states:
        raise InvalidInstance(f"initial state {fsmc.initial} does not exist")

    for k, state in enumerate(fsmc.states):
        if len(state.demand) != fsmc.n_clients or len(state.success) != fsmc.n_aps:
            raise InvalidInstance(f"state {k} does not match the network dimensions")
        if any(int(d) != d or d < 0 for d in state.demand):
            raise InvalidInstance(f"state {k} has a negative or fractional demand")

    graph = nx.DiGraph()
    graph.add_nodes_from(range(n_states))
    graph.add_edges_from(zip(*np.nonzero(transition > 0)))
    if not nx.is_strongly_connected(graph):
        raise InvalidInstance("FSMC transition graph is not irreducible")


def stationary_distribution(transition) -> np.ndarray:
    transition = np.asarray(transition, dtype=float)
    n = len(transition)
    system = np.vstack([transition.T - np.eye(n), np.ones((1, n))])
    rhs = np.concatenate([np.zeros(n), [1.0]])
    pi, *_ = scipy.linalg.lstsq(system, rhs)

    residual = np.abs(pi @ transition - pi).max()
    if residual > settings.TT_STATIONARY_TOL or np.any(pi < -1e-12):
        raise NumericalFailure(f"stationary distribution did not converge (residual {residual:g})")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def simulate_fsmc(fsmc: FsmcSpec, partition_per_state, tau, intervals, seed) -> Metrics:
    validate_fsmc(fsmc)
    if len(partition_per_state) != len(fsmc.states):
        raise InvalidInstance(f"{len(partition_per_state)} partitions for {len(fsmc.states)} states")
    if intervals < 1:
        raise InvalidInstance(f"intervals must be positive, got {intervals}")

    expanded = []
    for k, partition in enumerate(partition_per_state):
        instance = fsmc.expanded(k, tau)
        if instance.empty:
            if any(partition.order) or partition.owner:
                raise InvalidInstance(f"state {k} has no demand but its partition serves clients")
        else:
            partition.validate(instance)
        expanded.append((instance, virtual_origins(fsmc.states[k].demand)))

    transition = np.cumsum(np.asarray(fsmc.transition, dtype=float), axis=1)
    w = np.ones(fsmc.n_clients) if fsmc.weights is None else np.asarray(fsmc.weights, dtype=float)
    delivered = np.zeros(fsmc.n_clients, dtype=np.int64)
    totals_sum = 0.0
    totals_squares = 0.0
    state = fsmc.initial
    visits = np.zeros(len(fsmc.states), dtype=np.int64)
    for r in range(intervals):
        visits[state] += 1
        instance, origins = expanded[state]
        total = 0.0
        if not instance.empty:
            generator = rng.generator(seed, rng.STATIC, r)
            for j in serve_interval(generator, partition_per_state[state].order, instance.success, tau):
                delivered[origins[j]] += 1
                total += w[origins[j]]
        totals_sum += total
        totals_squares += total * total

        step = rng.generator(seed, rng.FSMC_CHAIN, r).random()
        state = min(int(np.searchsorted(transition[state], step, side='right')), len(fsmc.states) - 1)

    logger.debug(f"FSMC state visits: {visits.tolist()}")
    return Metrics.collect(delivered, totals_sum, totals_squares, intervals, seed, fsmc.weights)


def fsmc_capacity(fsmc: FsmcSpec, tau, search=Search.EXHAUSTIVE) -> float:
    validate_fsmc(fsmc)
    pi = stationary_distribution(fsmc.transition)
    return float(sum(pi[k] * exact_capacity(fsmc.expanded(k, tau), search).value for k in range(len(fsmc.states))))


def fsmc_c_det(fsmc: FsmcSpec, tau) -> float:
    validate_fsmc(fsmc)
    pi = stationary_distribution(fsmc.transition)
    return float(sum(pi[k] * solve_gap_exact(fsmc.expanded(k, tau)).objective for k in range(len(fsmc.states))))


def optimal_partitions(fsmc: FsmcSpec, tau, search=Search.EXHAUSTIVE) -> List[Partition]:
    return [exact_capacity(fsmc.expanded(k, tau), search).best_partition for k in range(len(fsmc.states))]


def load_fsmc(path) -> FsmcSpec:
    with open(path) as f:
        fsmc = serde.json.from_json(FsmcSpec, f.read())
    validate_fsmc(fsmc)
    return fsmc
