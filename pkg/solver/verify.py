"""
Numeric checks of the capacity bounds and the instances that make them tight.

Every check works on exact solver values, never on simulation, so the strict
inequalities are decided up to settings.TT_BOUND_TOL.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import serde
from scipy.special import gammaln

from timely import settings

from .errors import InvalidInstance, NumericalFailure
from .exact import Search, delivery_distribution, evaluate_partition, exact_capacity
from .model import UNSERVED, Instance, Partition, build_instance
from .relax import pack_count, round_down, solve_gap_exact, solve_lp_relaxation
from .simulate import FsmcSpec, fsmc_c_det, fsmc_capacity
from .utils import sizes_from_probs

logger = logging.getLogger("solver.verify")

EXACT_BINOMIAL_MAX_TAU = 50


@serde.serde
@dataclass
class GapReport:
    c_t3: float
    c_det: float
    lower_bound: float
    upper_bound: float
    lower_ok: bool
    upper_ok: bool
    w_max: float = 1.0
    instance_id: Optional[str] = None

    @property
    def satisfied(self) -> bool:
        return self.lower_ok and self.upper_ok

    @property
    def gap(self) -> float:
        return self.c_t3 - self.c_det

    def as_row(self) -> dict:
        return {
            'instance_id': self.instance_id,
            'c_t3': self.c_t3,
            'c_det': self.c_det,
            'lb': self.lower_bound,
            'ub': self.upper_bound,
            'ok': self.satisfied,
        }


@serde.serde
@dataclass
class BoundsCheck:
    l: int
    expected: float
    lower: float
    upper: float
    within: bool
    sum_bound: bool


@serde.serde
@dataclass
class PolicyCheck:
    applicable: bool
    c_t3: float
    value: float
    threshold: float
    ok: bool


def capacity_bounds(c_det, n_aps, w_max=1.0) -> tuple:
    lower = c_det - 2 * w_max * math.sqrt(n_aps * (c_det + n_aps / 4))
    upper = c_det + n_aps * w_max
    return lower, upper


def bound_report(c_t3, c_det, n_aps, w_max=1.0, instance_id=None) -> GapReport:
    tol = settings.TT_BOUND_TOL
    lower, upper = capacity_bounds(c_det, n_aps, w_max)
    return GapReport(c_t3=float(c_t3), c_det=float(c_det), lower_bound=lower, upper_bound=upper,
                     lower_ok=bool(c_t3 - lower > tol), upper_ok=bool(upper - c_t3 > tol),
                     w_max=float(w_max), instance_id=instance_id)


def gap_report(instance: Instance, search=Search.EXHAUSTIVE, instance_id=None) -> GapReport:
    c_t3 = exact_capacity(instance, search).value
    c_det = solve_gap_exact(instance).objective
    w_max = instance.w_max if instance.weighted else 1.0
    report = bound_report(c_t3, c_det, instance.n_aps, w_max, instance_id)
    if not report.satisfied:
        logger.warning(f"capacity bounds violated: {report}")
    return report


def fsmc_gap_report(fsmc: FsmcSpec, tau, search=Search.EXHAUSTIVE) -> GapReport:
    """Stationary averages of C_T3 and C_det over the channel/traffic chain."""
    c_t3 = fsmc_capacity(fsmc, tau, search)
    c_det = fsmc_c_det(fsmc, tau)
    w_max = max(fsmc.weights) if fsmc.weights else 1.0
    return bound_report(c_t3, c_det, fsmc.n_aps, w_max)


def log_binomial_term(tau, l, p) -> float:
    """log of C(tau-1, l) p^l (1-p)^(tau-l)."""
    if tau - 1 <= EXACT_BINOMIAL_MAX_TAU:
        coefficient = math.log(math.comb(tau - 1, l))
    else:
        coefficient = gammaln(tau) - gammaln(l + 1) - gammaln(tau - l)
    return float(coefficient + l * math.log(p) + (tau - l) * math.log1p(-p))


def equal_prob_gap(p, tau, l) -> float:
    """l - E[min(Bin(tau, p), l)] for one AP serving l clients of equal success p."""
    if l < 1 or l > tau - 1 or not 0 < p < 1:
        return 0.0
    return l * math.exp(log_binomial_term(tau, l, p))


def lower_tightness_constant(p) -> float:
    return math.exp(-1 / 6) * math.sqrt((1 - p) / (2 * math.pi))


def tight_upper_instance(n_aps, c_det_target, epsilon, tau=None) -> Instance:
    """
    N*tau clients of equal success (C_det + N - eps) / (N tau): every AP packs
    C_det/N clients deterministically but delivers tau p on average.
    """
    if n_aps < 1 or c_det_target < 0 or c_det_target % n_aps:
        raise InvalidInstance(f"C_det {c_det_target} must be a nonnegative multiple of {n_aps}")
    if not 0 < epsilon < n_aps:
        raise InvalidInstance(f"epsilon must lie in (0, {n_aps}), got {epsilon}")
    if tau is None:
        tau = c_det_target // n_aps + 2
    p = (c_det_target + n_aps - epsilon) / (n_aps * tau)
    m = n_aps * tau
    if p >= 1 or c_det_target >= m - n_aps:
        raise InvalidInstance(f"tau={tau} is too short for C_det {c_det_target}")
    return build_instance(n_aps, m, tau, [[p] * m for _ in range(n_aps)])


def tight_lower_instance(n_aps, c_det_target, tau=None) -> tuple:
    """
    C_det clients of equal success C_det / (N tau), l = C_det/N per AP.
    Returns (instance, closed-form C_det - C_T3).
    """
    if n_aps < 1 or c_det_target < 1 or c_det_target % n_aps:
        raise InvalidInstance(f"C_det {c_det_target} must be a positive multiple of {n_aps}")
    l = c_det_target // n_aps
    if tau is None:
        tau = 2 * l
    p = c_det_target / (n_aps * tau)
    if p >= 1:
        raise InvalidInstance(f"tau={tau} is too short for C_det {c_det_target}")

    instance = build_instance(n_aps, c_det_target, tau, [[p] * c_det_target for _ in range(n_aps)])
    gap = n_aps * equal_prob_gap(p, tau, l)
    return instance, gap


def balanced_partition(instance: Instance) -> Partition:
    owner = [j % instance.n_aps for j in range(instance.n_clients)]
    return Partition.from_owner(instance, owner)


def check_tight_upper(instance: Instance, c_det_target, epsilon, search=Search.BRANCH_AND_BOUND) -> GapReport:
    report = gap_report(instance, search)
    expected = instance.n_aps - epsilon
    if report.c_det != c_det_target or abs(report.gap - expected) > 1e-6:
        raise NumericalFailure(f"tight upper construction measured C_det={report.c_det} gap={report.gap}, "
                               f"expected {c_det_target} and {expected}")
    return report


def check_tight_lower(instance: Instance, gap, c_det_target) -> float:
    """Measured C_det - T3 of the balanced split; must equal the closed form and beat k sqrt(l) N."""
    c_det = solve_gap_exact(instance).objective
    if c_det != c_det_target:
        raise NumericalFailure(f"tight lower construction packs {c_det}, expected {c_det_target}")
    measured = c_det - evaluate_partition(instance, balanced_partition(instance))
    if abs(measured - gap) > 1e-9:
        raise NumericalFailure(f"measured gap {measured} differs from closed form {gap}")
    p = instance.success[0][0]
    l = c_det_target // instance.n_aps
    floor = lower_tightness_constant(p) * math.sqrt(l) * instance.n_aps
    if measured <= floor:
        raise NumericalFailure(f"gap {measured} does not exceed {floor}")
    return measured


def sum_bound_holds(l) -> bool:
    """1 + sum_{i<l} min(1, i / (l-i)^2) < 2 sqrt(l + 1/4)."""
    if l <= 1:
        return True
    total = 1 + sum(min(1.0, i / (l - i) ** 2) for i in range(1, l))
    return total < 2 * math.sqrt(l + 0.25)


def lemma_bounds_check(probs, tau, weights=None) -> BoundsCheck:
    """
    Compares the expected in-deadline deliveries of one AP with the pack count
    l of its deterministic sizes: l - 2 sqrt(l + 1/4) < E[Y] < l + 1, and the
    weighted analogue with the weights of the first l clients and w_max.
    """
    probs = np.asarray(probs, dtype=float)
    w = np.ones(len(probs)) if weights is None else np.asarray(weights, dtype=float)
    order = sorted(range(len(probs)), key=lambda k: (-w[k] * probs[k], k))
    probs, w = probs[order], w[order]

    l = pack_count(sizes_from_probs(probs), tau)
    dist = delivery_distribution(probs.tolist(), tau)
    if weights is None:
        expected = dist.mean()
        lower, upper = l - 2 * math.sqrt(l + 0.25), l + 1.0
    else:
        expected = dist.mean(w.tolist())
        w_max = float(w.max()) if len(w) else 1.0
        head = float(w[:l].sum())
        lower, upper = head - 2 * w_max * math.sqrt(l + 0.25), head + w_max
    return BoundsCheck(l=l, expected=expected, lower=lower, upper=upper,
                      within=bool(lower < expected < upper), sum_bound=sum_bound_holds(l))


def assignment_partition(gap, instance: Instance) -> Partition:
    """Greedy static partition serving exactly the clients a GAP solution packs."""
    owner = [UNSERVED] * instance.n_clients
    for i, row in enumerate(gap.x):
        for j, chosen in enumerate(row):
            if chosen:
                owner[j] = i
    return Partition.from_owner(instance, owner)


def policy_bound_check(c_t3, value, n_aps, applicable, slack, offset) -> PolicyCheck:
    threshold = c_t3 - slack * n_aps - 2 * math.sqrt(n_aps * max(c_t3 - offset * n_aps, 0.0))
    ok = not applicable or value >= threshold - settings.TT_BOUND_TOL
    return PolicyCheck(applicable=bool(applicable), c_t3=float(c_t3), value=float(value),
                          threshold=threshold, ok=bool(ok))


def gap_policy_check(instance: Instance, search=Search.EXHAUSTIVE) -> PolicyCheck:
    """T3 of the greedy static policy on the exact GAP assignment, once C_T3 >= 7N/4."""
    n = instance.n_aps
    c_t3 = exact_capacity(instance, search).value
    value = evaluate_partition(instance, assignment_partition(solve_gap_exact(instance), instance))
    return policy_bound_check(c_t3, value, n, c_t3 >= 7 * n / 4, 1, 3 / 4)


def rounded_policy_check(instance: Instance, search=Search.EXHAUSTIVE) -> PolicyCheck:
    """T3 of the greedy static policy on the rounded basic LP solution, once C_T3 > 11N/4."""
    n = instance.n_aps
    c_t3 = exact_capacity(instance, search).value
    rounded = round_down(solve_lp_relaxation(instance))
    value = evaluate_partition(instance, assignment_partition(rounded, instance))
    return policy_bound_check(c_t3, value, n, c_t3 > 11 * n / 4, 2, 7 / 4)


def rounding_loss(instance: Instance) -> tuple:
    """(C_det minus the rounded-down LP objective, |Z2| + |Z3|) of the basic LP solution."""
    lp = solve_lp_relaxation(instance)
    rounded = round_down(lp)
    c_det = solve_gap_exact(instance).objective
    return c_det - rounded.objective, lp.fractional_count
