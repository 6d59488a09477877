"""
Deterministic relaxation of the scheduling problem.

Every channel is replaced by a deterministic delay of 1/p_ij slots, which
turns the problem into a generalized assignment problem (GAP): N bins of
capacity tau, item j has size 1/p_ij in bin i and profit w_j. This module
solves the GAP exactly, solves its linear relaxation to a basic optimal
solution, and rounds that solution down.
"""

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import serde

from timely import settings

from . import simplex
from .errors import BudgetExceeded
from .model import UNSERVED, Instance, Partition
from .utils import parse_budget, sizes_from_probs

logger = logging.getLogger("solver.relax")

SIZE_TOL = 1e-9
BRUTE_FORCE_CHUNK = 1 << 16


@serde.serde
@dataclass
class GapSolution:
    x: List[List[int]]
    objective: float
    per_bin_load: List[float]
    method: str = 'brute-force'

    @property
    def assigned(self) -> int:
        return int(np.asarray(self.x).sum()) if self.x and self.x[0] else 0


@serde.serde
@dataclass
class LpSolution:
    x: List[List[float]]
    objective: float
    z_sets: List[List[int]]
    tau: int
    success: List[List[float]]
    weights: List[float] = field(default_factory=list)
    pivots: int = 0

    @property
    def fractional_count(self) -> int:
        return len(self.z_sets[1]) + len(self.z_sets[2])


def pack_count(sizes, tau) -> int:
    total = 0.0
    count = 0
    for size in sizes:
        if math.isinf(size):
            break
        total += size
        if total > tau + SIZE_TOL:
            break
        count += 1
    return count


def size_matrix(instance: Instance) -> np.ndarray:
    return np.array([sizes_from_probs(row) for row in instance.success]).reshape(instance.n_aps, instance.n_clients)


def gap_solution(instance: Instance, owner, method) -> GapSolution:
    sizes = size_matrix(instance)
    x = np.zeros((instance.n_aps, instance.n_clients), dtype=int)
    for j, ap in enumerate(owner):
        if ap != UNSERVED:
            x[ap, j] = 1
    load = [float(sizes[i][x[i] == 1].sum()) for i in range(instance.n_aps)]
    objective = float(np.dot(x.sum(axis=0), instance.w))
    return GapSolution(x=x.tolist(), objective=objective, per_bin_load=load, method=method)


def brute_force_gap(instance: Instance) -> GapSolution:
    """
    Enumerates every owner vector in base N+1 (digit 0 = unserved, d = AP d-1)
    in chunks; the first vector of maximal profit wins.
    """
    n, m, tau = instance.n_aps, instance.n_clients, instance.tau
    sizes = np.minimum(size_matrix(instance), tau + 1.0)
    w = instance.w
    base = n + 1
    powers = base ** np.arange(m, dtype=np.int64)
    total = base ** m

    best_value = -1.0
    best_index = 0
    for start in range(0, total, BRUTE_FORCE_CHUNK):
        index = np.arange(start, min(total, start + BRUTE_FORCE_CHUNK), dtype=np.int64)
        digits = (index[:, None] // powers[None, :]) % base
        feasible = np.ones(len(index), dtype=bool)
        for i in range(n):
            load = ((digits == i + 1) * sizes[i][None, :]).sum(axis=1)
            feasible &= load <= tau + SIZE_TOL
        profit = np.where(feasible, (digits > 0) @ w, -1.0)
        k = int(np.argmax(profit))
        if profit[k] > best_value + 1e-12:
            best_value = float(profit[k])
            best_index = int(index[k])

    digits = (best_index // powers) % base
    owner = [int(d) - 1 if d > 0 else UNSERVED for d in digits]
    return gap_solution(instance, owner, 'brute-force')


def lp_bound(instance: Instance, fixed) -> tuple:
    """
    LP relaxation restricted to the clients that are still free. `fixed`
    maps client -> AP (or UNSERVED). Returns (bound, x matrix) or (None, None)
    when the fixed part alone overflows a bin.
    """
    n, m, tau = instance.n_aps, instance.n_clients, instance.tau
    sizes = size_matrix(instance)
    w = instance.w

    capacity = np.full(n, float(tau))
    value = 0.0
    for j, ap in fixed.items():
        if ap != UNSERVED:
            capacity[ap] -= sizes[ap, j]
            value += w[j]
    if np.any(capacity < -SIZE_TOL):
        return None, None
    capacity = np.maximum(capacity, 0.0)

    free = [j for j in range(m) if j not in fixed]
    solution = lp_solve(instance, free, capacity)
    x = solution[0]
    for j, ap in fixed.items():
        if ap != UNSERVED:
            x[ap, j] = 1.0
    return value + solution[1], x


def lp_solve(instance: Instance, clients, capacity):
    """Maximize sum w_j x_ij over the given clients; returns (x, objective, pivots)."""
    n, m = instance.n_aps, instance.n_clients
    p = instance.p
    w = instance.w

    variables = [(i, j) for i in range(n) for j in clients if p[i, j] > 0]
    x = np.zeros((n, m))
    if not variables:
        return x, 0.0, 0

    column = {j: k for k, j in enumerate(clients)}
    A = np.zeros((n + len(clients), len(variables)))
    c = np.zeros(len(variables))
    for k, (i, j) in enumerate(variables):
        A[i, k] = 1.0 / p[i, j]
        A[n + column[j], k] = 1.0
        c[k] = w[j]
    b = np.concatenate([capacity, np.ones(len(clients))])

    tableau = simplex.maximize(c, A, b)
    values = tableau.solution()
    for k, (i, j) in enumerate(variables):
        x[i, j] = values[k]
    return x, tableau.objective, tableau.pivots


def is_integral(x, tol) -> bool:
    return bool(np.all(np.minimum(np.abs(x), np.abs(1 - x)) <= tol))


class GapBranchAndBound:
    """
    Best-first search over client assignments. A node is bounded by the
    smaller of its LP relaxation and the profit of the heaviest free clients
    each bin could still hold by count alone.
    """

    def __init__(self, instance: Instance, node_budget):
        self.instance = instance
        self.node_budget = node_budget
        self.sizes = size_matrix(instance)
        self.tol = settings.TT_FRACTIONAL_TOL
        self.clients = sorted(range(instance.n_clients), key=lambda j: (-instance.w[j], j))
        self.integral = bool(np.all(instance.w == np.round(instance.w)))

    def count_bound(self, fixed) -> float:
        w = self.instance.w
        capacity = np.full(self.instance.n_aps, float(self.instance.tau))
        value = 0.0
        for j, ap in fixed.items():
            if ap != UNSERVED:
                capacity[ap] -= self.sizes[ap, j]
                value += w[j]
        free = [j for j in range(self.instance.n_clients) if j not in fixed]
        heaviest = np.sort(w[free])[::-1]
        for i in range(self.instance.n_aps):
            fits = pack_count(np.sort(self.sizes[i, free]), max(capacity[i], 0.0))
            value += heaviest[:fits].sum()
        return float(value)

    def bound(self, fixed) -> tuple:
        bound, x = lp_bound(self.instance, fixed)
        if bound is None:
            return None, None
        bound = min(bound, self.count_bound(fixed))
        if self.integral:
            bound = math.floor(bound + 1e-9)
        return bound, x

    def incumbent(self, x) -> tuple:
        """Rounds an LP point down and fills bins greedily with whatever still fits."""
        n, tau = self.instance.n_aps, self.instance.tau
        owner = [UNSERVED] * self.instance.n_clients
        load = np.zeros(n)
        for i in range(n):
            for j in range(self.instance.n_clients):
                if x[i, j] >= 1 - self.tol and owner[j] == UNSERVED:
                    owner[j] = i
                    load[i] += self.sizes[i, j]
        for j in self.clients:
            if owner[j] != UNSERVED:
                continue
            for i in np.argsort(self.sizes[:, j], kind='stable'):
                if load[i] + self.sizes[i, j] <= tau + SIZE_TOL:
                    owner[j] = int(i)
                    load[i] += self.sizes[i, j]
                    break
        value = float(sum(self.instance.w[j] for j in range(len(owner)) if owner[j] != UNSERVED))
        return value, owner

    def solve(self) -> GapSolution:
        counter = itertools.count()
        bound, x = self.bound({})
        best_value, best_owner = self.incumbent(x)
        queue = [(-bound, next(counter), {})]
        nodes = 0

        while queue:
            negative_bound, _, fixed = heapq.heappop(queue)
            if -negative_bound <= best_value + 1e-9:
                break
            nodes += 1
            if nodes > self.node_budget:
                raise BudgetExceeded("GAP branch and bound", nodes, self.node_budget)

            free = [j for j in self.clients if j not in fixed]
            j = free[0]
            for ap in [*range(self.instance.n_aps), UNSERVED]:
                child = {**fixed, j: ap}
                bound, x = self.bound(child)
                if bound is None or bound <= best_value + 1e-9:
                    continue
                value, owner = self.incumbent(x)
                if value > best_value:
                    best_value, best_owner = value, owner
                if len(child) < self.instance.n_clients and not is_integral(x, self.tol):
                    heapq.heappush(queue, (-bound, next(counter), child))

        logger.debug(f"GAP branch and bound expanded {nodes} nodes")
        return gap_solution(self.instance, best_owner, 'branch-and-bound')


def solve_gap_exact(instance: Instance, budget=None, node_budget=None) -> GapSolution:
    if instance.empty:
        return GapSolution(x=[[] for _ in range(instance.n_aps)], objective=0.0,
                           per_bin_load=[0.0] * instance.n_aps)

    if budget is None:
        budget = parse_budget(settings.TT_GAP_BRUTE_FORCE_BUDGET)
    if (instance.n_aps + 1) ** instance.n_clients <= budget:
        return brute_force_gap(instance)

    if node_budget is None:
        node_budget = parse_budget(settings.TT_GAP_NODE_BUDGET)
    logger.info(f"{instance.n_aps + 1}^{instance.n_clients} owner vectors exceed {budget}, using branch and bound")
    return GapBranchAndBound(instance, node_budget).solve()


def z_sets(x: np.ndarray, tol) -> List[List[int]]:
    column = x.sum(axis=0)
    floors = np.floor(x + tol).sum(axis=0)
    sets = [[], [], [], []]
    for j in range(x.shape[1]):
        if column[j] <= tol:
            sets[0].append(j)
        elif column[j] < 1 - tol:
            sets[1].append(j)
        elif floors[j] < 1:
            sets[2].append(j)
        else:
            sets[3].append(j)
    return sets


def solve_lp_relaxation(instance: Instance) -> LpSolution:
    n, m = instance.n_aps, instance.n_clients
    x, objective, pivots = lp_solve(instance, list(range(m)), np.full(n, float(instance.tau)))
    tol = settings.TT_FRACTIONAL_TOL
    solution = LpSolution(x=x.tolist(), objective=float(objective), z_sets=z_sets(x, tol), tau=instance.tau,
                          success=instance.success, weights=instance.w.tolist(), pivots=pivots)
    logger.debug(f"LP relaxation objective {objective:.6f}, {solution.fractional_count} fractional clients")
    return solution


def round_down(lp: LpSolution) -> GapSolution:
    tol = settings.TT_FRACTIONAL_TOL
    x = np.asarray(lp.x, dtype=float)
    if x.size == 0:
        return GapSolution(x=lp.x, objective=0.0, per_bin_load=[0.0] * len(lp.x), method='lp-floor')

    rounded = np.floor(x + tol).astype(int)
    sizes = np.array([sizes_from_probs(row) for row in lp.success])
    load = [float(sizes[i][rounded[i] == 1].sum()) for i in range(len(rounded))]
    weights = np.asarray(lp.weights, dtype=float) if lp.weights else np.ones(x.shape[1])
    objective = float(np.dot(rounded.sum(axis=0), weights))
    return GapSolution(x=rounded.tolist(), objective=objective, per_bin_load=load, method='lp-floor')


def completed_partition(gap: GapSolution, instance: Instance) -> Partition:
    """
    Clients packed by the GAP solution keep their AP; the others are dealt
    round-robin over the APs in ascending client order.
    """
    x = np.asarray(gap.x, dtype=int).reshape(instance.n_aps, instance.n_clients)
    owner = [UNSERVED] * instance.n_clients
    for i, j in zip(*np.nonzero(x)):
        owner[int(j)] = int(i)

    leftovers = [j for j in range(instance.n_clients) if owner[j] == UNSERVED]
    for k, j in enumerate(leftovers):
        owner[j] = k % instance.n_aps
    return Partition.from_owner(instance, owner)
