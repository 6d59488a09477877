"""
Coordinated online scheduling.

Packets are no longer split among the APs: in every slot each AP picks any
pending packet, possibly the same one as another AP. The optimum is a finite
horizon MDP over (pending bitmask, slot); the greedy heuristic maximizes the
expected deliveries of the current slot only.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import serde

from timely import settings

from . import rng
from .errors import BudgetExceeded, InvalidInstance
from .exact import Search, exact_capacity
from .model import Instance
from .utils import parse_budget

logger = logging.getLogger("solver.online")

IDLE = -1
GENERAL_N_MAX_CLIENTS = 8
REGION_MAX_CLIENTS = 10


@dataclass
class MdpState:
    pending: int
    slot: int


@dataclass
class SlotAction:
    targets: List[int]
    expected: float = 0.0
    candidates: int = 0


@dataclass
class Exact:
    pass


@dataclass
class Simulated:
    intervals: int
    seed: int


@serde.serde
@dataclass
class OnlineComparison:
    optimal_online: float
    greedy_heuristic: float
    best_split: float


def slot_reward(targets, success, weights) -> float:
    """Expected (weighted) deliveries of one slot when AP m transmits targets[m]."""
    miss = {}
    for ap, j in enumerate(targets):
        if j == IDLE:
            continue
        miss[j] = miss.get(j, 1.0) * (1.0 - success[ap][j])
    return float(sum(weights[j] * (1.0 - q) for j, q in miss.items()))


class OnlineMdp:
    """Backward induction over all pending sets with dense per-slot value arrays."""

    def __init__(self, instance: Instance, weights=None, budget=None):
        n, m, tau = instance.n_aps, instance.n_clients, instance.tau
        if n > 2 and m > GENERAL_N_MAX_CLIENTS:
            raise BudgetExceeded(f"online MDP with {n} APs", m, GENERAL_N_MAX_CLIENTS)
        if budget is None:
            budget = parse_budget(settings.TT_MDP_STATE_BUDGET)
        needed = tau * 2 ** m * m ** n * 2 ** n
        if needed > budget:
            raise BudgetExceeded("online MDP", needed, budget)

        self.instance = instance
        self.weights = instance.w if weights is None else np.asarray(weights, dtype=float)
        self.masks = np.arange(2 ** m, dtype=np.int64)
        self.actions = list(itertools.product(range(m), repeat=n))
        self.outcomes = [self.action_outcomes(action) for action in self.actions]
        self.required = np.array([sum(1 << j for j in set(action)) for action in self.actions], dtype=np.int64)
        self.policy = None
        self.value = None

    def action_outcomes(self, action):
        """(probability, delivered bits, reward) for every joint success pattern of the APs."""
        p = self.instance.success
        outcomes = []
        for pattern in itertools.product((False, True), repeat=len(action)):
            prob = 1.0
            bits = 0
            for ap, (j, ok) in enumerate(zip(action, pattern)):
                prob *= p[ap][j] if ok else 1.0 - p[ap][j]
                if ok:
                    bits |= 1 << j
            if prob > 0:
                reward = sum(self.weights[j] for j in range(self.instance.n_clients) if bits >> j & 1)
                outcomes.append((prob, bits, float(reward)))
        return outcomes

    def solve(self) -> float:
        tau = self.instance.tau
        following = np.zeros(len(self.masks))
        self.policy = np.zeros((tau, len(self.masks)), dtype=np.int64)
        for t in range(tau - 1, -1, -1):
            current = np.full(len(self.masks), -np.inf)
            best = np.full(len(self.masks), IDLE, dtype=np.int64)
            for a, outcomes in enumerate(self.outcomes):
                valid = (self.masks & self.required[a]) == self.required[a]
                value = np.zeros(len(self.masks))
                for prob, bits, reward in outcomes:
                    value += prob * (reward + following[self.masks & ~bits])
                # ties keep the lexicographically first action
                update = valid & (value > current + 1e-15)
                current = np.where(update, value, current)
                best = np.where(update, a, best)
            # only the empty set has no valid action
            current[best == IDLE] = 0.0
            self.policy[t] = best
            following = current
        self.value = following
        return float(following[-1])

    def per_client_throughput(self) -> List[float]:
        """Delivery probability of every client under the computed optimal policy."""
        if self.policy is None:
            self.solve()
        m = self.instance.n_clients
        dist = np.zeros(len(self.masks))
        dist[-1] = 1.0
        delivered = np.zeros(m)
        for t in range(self.instance.tau):
            following = np.zeros(len(self.masks))
            for a, outcomes in enumerate(self.outcomes):
                selected = (self.policy[t] == a) & (dist > 0) & (self.masks > 0)
                if not selected.any():
                    continue
                masks = self.masks[selected]
                mass = dist[selected]
                for prob, bits, _ in outcomes:
                    np.add.at(following, masks & ~bits, mass * prob)
                    for j in range(m):
                        if bits >> j & 1:
                            delivered[j] += prob * mass.sum()
            following[0] += dist[0]
            dist = following
        return delivered.tolist()


def mdp_optimal_value(instance: Instance, weights=None, budget=None) -> float:
    if instance.empty:
        return 0.0
    value = OnlineMdp(instance, weights, budget).solve()
    logger.debug(f"optimal online value {value:.6f}")
    return value


def region_corners(instance: Instance) -> List[List[float]]:
    """
    Per-client throughput vectors that maximize the total over every nonempty
    subset of clients; for small instances these are the corner points of the
    timely throughput region of coordinated online scheduling.
    """
    m = instance.n_clients
    if m > REGION_MAX_CLIENTS:
        raise BudgetExceeded("throughput region corners", 2 ** m, 2 ** REGION_MAX_CLIENTS)

    corners = []
    for direction in itertools.product((0.0, 1.0), repeat=m):
        if not any(direction):
            continue
        mdp = OnlineMdp(instance, direction)
        mdp.solve()
        vector = [round(v, 12) for v in mdp.per_client_throughput()]
        if vector not in corners:
            corners.append(vector)
    return corners


def ordered_lists(instance: Instance, pending) -> List[List[int]]:
    """Pending clients of every AP, best w_j p_ij first, ties by client index."""
    w = instance.w
    return [sorted(pending, key=lambda j: (-w[j] * row[j], j)) for row in instance.success]


def greedy_slot_choice(lists, success, pending, weights=None) -> SlotAction:
    n = len(success)
    if not pending:
        return SlotAction(targets=[IDLE] * n)
    if weights is None:
        weights = [1.0] * len(success[0])
    for ap, candidates in enumerate(lists):
        if any(j not in pending for j in candidates):
            raise InvalidInstance(f"list of AP {ap} contains a delivered client")

    best = None
    count = 0
    for targets in itertools.product(*[candidates[:min(n, len(candidates))] for candidates in lists]):
        count += 1
        value = slot_reward(targets, success, weights)
        if best is None or value > best[0] + 1e-12 or (abs(value - best[0]) <= 1e-12 and targets < best[1]):
            best = (value, targets)
    return SlotAction(targets=list(best[1]), expected=best[0], candidates=count)


def unrestricted_slot_choice(success, pending, weights=None) -> SlotAction:
    """Best one-slot action over every tuple of pending clients."""
    n = len(success)
    if not pending:
        return SlotAction(targets=[IDLE] * n)
    if weights is None:
        weights = [1.0] * len(success[0])
    best = None
    count = 0
    for targets in itertools.product(sorted(pending), repeat=n):
        count += 1
        value = slot_reward(targets, success, weights)
        if best is None or value > best[0] + 1e-12:
            best = (value, targets)
    return SlotAction(targets=list(best[1]), expected=best[0], candidates=count)


class GreedyPolicy:
    """Per slot, the best action among the first N entries of every AP list."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.weights = instance.w.tolist()
        self.cache = {}
        self.candidates = 0
        self.slot_decisions = 0

    def pending(self, mask):
        return [j for j in range(self.instance.n_clients) if mask >> j & 1]

    def action(self, mask) -> SlotAction:
        if mask not in self.cache:
            pending = self.pending(mask)
            lists = ordered_lists(self.instance, pending)
            self.cache[mask] = greedy_slot_choice(lists, self.instance.success, set(pending), self.weights)
        action = self.cache[mask]
        self.candidates += action.candidates
        self.slot_decisions += 1
        return action

    def outcomes(self, action: SlotAction):
        p = self.instance.success
        active = [(ap, j) for ap, j in enumerate(action.targets) if j != IDLE]
        for pattern in itertools.product((False, True), repeat=len(active)):
            prob = 1.0
            bits = 0
            for (ap, j), ok in zip(active, pattern):
                prob *= p[ap][j] if ok else 1.0 - p[ap][j]
                if ok:
                    bits |= 1 << j
            if prob > 0:
                yield prob, bits

    def exact_value(self, budget=None) -> float:
        m, tau = self.instance.n_clients, self.instance.tau
        if budget is None:
            budget = parse_budget(settings.TT_MDP_STATE_BUDGET)
        if 2 ** m * tau > budget:
            raise BudgetExceeded("greedy policy evaluation", 2 ** m * tau, budget)

        dist = {(1 << m) - 1: 1.0}
        value = 0.0
        for t in range(tau):
            following = {}
            for mask, mass in dist.items():
                if mask == 0:
                    following[0] = following.get(0, 0.0) + mass
                    continue
                action = self.action(mask)
                value += mass * action.expected
                for prob, bits in self.outcomes(action):
                    after = mask & ~bits
                    following[after] = following.get(after, 0.0) + mass * prob
            dist = following
        return value

    def simulated_value(self, intervals, seed) -> float:
        m, tau = self.instance.n_clients, self.instance.tau
        p = self.instance.success
        total = 0.0
        for r in range(intervals):
            generator = rng.generator(seed, rng.ONLINE, r)
            draws = generator.random((tau, self.instance.n_aps))
            mask = (1 << m) - 1
            for t in range(tau):
                if mask == 0:
                    break
                action = self.action(mask)
                delivered = 0
                for ap, j in enumerate(action.targets):
                    if j != IDLE and draws[t, ap] < p[ap][j]:
                        delivered |= 1 << j
                total += sum(self.weights[j] for j in range(m) if delivered >> j & 1)
                mask &= ~delivered
        return total / intervals


def greedy_policy_value(instance: Instance, mode=None) -> float:
    if instance.empty:
        return 0.0
    mode = Exact() if mode is None else mode
    policy = GreedyPolicy(instance)
    if isinstance(mode, Simulated):
        if mode.intervals < 1:
            raise InvalidInstance(f"intervals must be positive, got {mode.intervals}")
        return policy.simulated_value(mode.intervals, mode.seed)
    return policy.exact_value()


def restriction_mismatches(instance: Instance) -> List[MdpState]:
    """
    States reachable under the greedy policy in which restricting every AP to
    the first N entries of its list loses one-slot value.
    """
    policy = GreedyPolicy(instance)
    m = instance.n_clients
    weights = instance.w.tolist()
    mismatches = []
    reachable = {(1 << m) - 1}
    for t in range(instance.tau):
        following = set()
        for mask in sorted(reachable):
            if mask == 0:
                continue
            restricted = policy.action(mask)
            full = unrestricted_slot_choice(instance.success, set(policy.pending(mask)), weights)
            if restricted.expected != full.expected and abs(restricted.expected - full.expected) > 1e-12:
                mismatches.append(MdpState(pending=mask, slot=t + 1))
            for _, bits in policy.outcomes(restricted):
                following.add(mask & ~bits)
        reachable = following
    return mismatches


def compare(instance: Instance, search=Search.EXHAUSTIVE) -> OnlineComparison:
    return OnlineComparison(
        optimal_online=mdp_optimal_value(instance),
        greedy_heuristic=greedy_policy_value(instance),
        best_split=exact_capacity(instance, search).value,
    )
