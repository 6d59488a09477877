"""
Seeded sweeps over random geometric instances.

Realization r uses the instance generated from seed_base + r. Every requested
mode adds one row per realization; rows are checked against the capacity
bounds and then written in realization order.
"""

import logging
import os
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
import yaml

from timely import settings

from . import rng
from .errors import BoundViolation, InvalidInstance, SolverError
from .exact import Search, evaluate_partition, exact_capacity
from .model import AP_POSITIONS, generate_geometric_instance
from .online import greedy_policy_value, mdp_optimal_value
from .relax import completed_partition, round_down, solve_gap_exact, solve_lp_relaxation
from .results import sweep_table
from .simulate import simulate_static
from .utils import parse_bool
from .verify import bound_report

logger = logging.getLogger("solver.sweep")

MODES = ['exact', 'relax', 'relax_policy', 'round', 'round_policy', 'online', 'greedy', 'simulate']
PRESETS_DIR = os.path.join(os.path.dirname(__file__), 'presets')
POLL_INTERVAL = 0.5


@dataclass
class SweepConfig:
    realizations: int = 1
    seed_base: int = 0
    m: int = 10
    tau: int = 15
    modes: List[str] = field(default_factory=list)
    search: str = Search.EXHAUSTIVE.value
    intervals: int = settings.TT_SIMULATION_INTERVALS
    queue: Optional[str] = settings.TT_SWEEP_QUEUE
    timeout: int = settings.TT_SWEEP_TIMEOUT
    timing: bool = False
    warnings: List[str] = field(default_factory=list)

    def add_warning(self, message):
        self.warnings.append(message)

    def parse_conf_realizations(self, conf):
        self.realizations = positive_int('realizations', conf)

    def parse_conf_seed_base(self, conf):
        if not isinstance(conf, int) or conf < 0:
            raise InvalidInstance(f"seed_base must be a nonnegative integer, got {conf!r}")
        self.seed_base = conf & rng.SEED_MASK

    def parse_conf_m(self, conf):
        self.m = positive_int('m', conf)

    def parse_conf_tau(self, conf):
        self.tau = positive_int('tau', conf)

    def parse_conf_modes(self, conf):
        if not conf:
            self.modes = []
            return
        if not isinstance(conf, list):
            raise InvalidInstance("modes is not a list")
        unknown = [mode for mode in conf if mode not in MODES]
        if unknown:
            raise InvalidInstance(f"unknown modes {unknown}, expected a subset of {MODES}")
        self.modes = [mode for mode in MODES if mode in conf]

    def parse_conf_search(self, conf):
        self.search = Search(conf).value

    def parse_conf_intervals(self, conf):
        self.intervals = positive_int('intervals', conf)

    def parse_conf_queue(self, conf):
        self.queue = conf

    def parse_conf_timeout(self, conf):
        self.timeout = positive_int('timeout', conf)

    def parse_conf_timing(self, conf):
        self.timing = parse_bool(conf)

    @classmethod
    def from_dict(cls, conf) -> "SweepConfig":
        config = cls()
        for key, value in (conf or {}).items():
            fn = getattr(config, f"parse_conf_{key}", None)
            if not fn:
                config.add_warning(f"Unknown configuration key: {key}")
            else:
                fn(value)
        return config

    @classmethod
    def from_yaml(cls, path) -> "SweepConfig":
        with open(path) as f:
            try:
                conf = yaml.load(f.read(), Loader=yaml.SafeLoader)
            except yaml.YAMLError as e:
                raise InvalidInstance(f"{path}: {e}")
        if conf is not None and not isinstance(conf, dict):
            raise InvalidInstance(f"{path}: expected a mapping of configuration keys")
        return cls.from_dict(conf)

    @classmethod
    def preset(cls, name) -> "SweepConfig":
        path = os.path.join(PRESETS_DIR, f"{name}.yml")
        if not os.path.exists(path):
            raise InvalidInstance(f"unknown preset {name}, available: {', '.join(preset_names())}")
        return cls.from_yaml(path)

    def seed(self, realization) -> int:
        return (self.seed_base + realization) & rng.SEED_MASK

    def as_dict(self) -> dict:
        conf = asdict(self)
        del conf['warnings']
        return conf


def positive_int(name, conf) -> int:
    if isinstance(conf, bool) or not isinstance(conf, int) or conf < 1:
        raise InvalidInstance(f"{name} must be a positive integer, got {conf!r}")
    return conf


def preset_names() -> List[str]:
    return sorted(f[:-len('.yml')] for f in os.listdir(PRESETS_DIR) if f.endswith('.yml'))


def mode_value(mode, instance, seed, config: SweepConfig, cache) -> float:
    """Value of one mode; GAP and LP solutions are shared between modes through cache."""
    def gap():
        if 'gap' not in cache:
            cache['gap'] = solve_gap_exact(instance)
        return cache['gap']

    def rounded():
        if 'rounded' not in cache:
            cache['rounded'] = round_down(solve_lp_relaxation(instance))
        return cache['rounded']

    if mode == 'exact':
        return exact_capacity(instance, config.search).value
    if mode == 'relax':
        return gap().objective
    if mode == 'relax_policy':
        return evaluate_partition(instance, completed_partition(gap(), instance))
    if mode == 'round':
        return rounded().objective
    if mode == 'round_policy':
        return evaluate_partition(instance, completed_partition(rounded(), instance))
    if mode == 'online':
        return mdp_optimal_value(instance)
    if mode == 'greedy':
        return greedy_policy_value(instance)
    if mode == 'simulate':
        partition = completed_partition(gap(), instance)
        return simulate_static(instance, partition, config.intervals, seed).t3_estimate
    raise InvalidInstance(f"unknown mode {mode}")


def check_rows(rows, n_aps, realization):
    """Rows of one realization must respect every bound that relates their modes."""
    values = {row['mode']: row['value'] for row in rows}
    tol = settings.TT_BOUND_TOL

    if 'exact' in values and 'relax' in values:
        report = bound_report(values['exact'], values['relax'], n_aps, instance_id=str(realization))
        if not report.satisfied:
            raise BoundViolation(f"realization {realization}: C_T3={report.c_t3} outside "
                                 f"({report.lower_bound}, {report.upper_bound})")
    if 'relax' in values and 'round' in values and values['relax'] - values['round'] > n_aps + tol:
        raise BoundViolation(f"realization {realization}: rounding lost more than {n_aps}")
    if 'exact' in values:
        for mode in ['relax_policy', 'round_policy']:
            if mode in values and values[mode] > values['exact'] + tol:
                raise BoundViolation(f"realization {realization}: {mode} exceeds C_T3")
    if 'online' in values:
        for mode in ['exact', 'greedy']:
            if mode in values and values[mode] > values['online'] + tol:
                raise BoundViolation(f"realization {realization}: {mode} exceeds the optimal online value")


@dataclass
class GapSummary:
    realizations: int
    median_gap: float
    max_gap: float
    median_bound: float

    def __str__(self):
        return (f"median |C_T3 - C_det| {self.median_gap:.6g} over {self.realizations} realizations "
                f"(max {self.max_gap:.6g}, median worst-case bound {self.median_bound:.6g})")


def gap_summary(table, n_aps=len(AP_POSITIONS)) -> Optional[GapSummary]:
    """|C_T3 - C_det| over the realizations that ran both exact and relax.

    The worst-case bound of a realization is 2 sqrt(N (C_det + N/4)).
    """
    frame = table.frame()
    if frame.empty:
        return None
    frame = frame[frame['mode'].isin(['exact', 'relax'])]
    values = frame.pivot(index='realization', columns='mode', values='value')
    if 'exact' not in values.columns or 'relax' not in values.columns:
        return None
    values = values.dropna().astype(float)
    if values.empty:
        return None

    gaps = (values['exact'] - values['relax']).abs()
    bounds = 2 * np.sqrt(n_aps * (values['relax'] + n_aps / 4))
    return GapSummary(realizations=len(values), median_gap=float(gaps.median()), max_gap=float(gaps.max()),
                      median_bound=float(bounds.median()))


def run_realization(conf: dict, realization) -> List[dict]:
    config = SweepConfig(**conf)
    seed = config.seed(realization)
    instance, _ = generate_geometric_instance(seed, config.m, config.tau)

    rows = []
    cache = {}
    for mode in config.modes:
        start = time.perf_counter()
        value = mode_value(mode, instance, seed, config, cache)
        runtime = (time.perf_counter() - start) * 1000 if config.timing else 0.0
        rows.append({'realization': realization, 'mode': mode, 'value': float(value),
                     'runtime_ms': round(runtime, 3), 'seed': seed})
    check_rows(rows, instance.n_aps, realization)
    logger.info(f"realization {realization} (seed {seed}) done: {len(rows)} rows")
    return rows


def sweep_job(conf: dict, realization) -> List[dict]:
    from rq import get_current_job

    logging.basicConfig(level=logging.DEBUG)
    job = get_current_job()
    if job:
        job.meta['realization'] = realization
        job.meta['modes'] = len(conf['modes'])
        job.save_meta()
    return run_realization(conf, realization)


class Sweep:
    def __init__(self, config: SweepConfig):
        self.config = config
        for warning in config.warnings:
            logger.warning(warning)

    def realizations(self):
        """Rows of every realization in order, computed inline or collected from rq jobs."""
        conf = self.config.as_dict()
        if not self.config.queue or not self.config.modes:
            for r in range(self.config.realizations):
                yield run_realization(conf, r)
            return

        import django_rq
        queue = django_rq.get_queue(self.config.queue)
        jobs = [queue.enqueue(sweep_job, conf, r, job_timeout=self.config.timeout)
                for r in range(self.config.realizations)]
        logger.info(f"enqueued {len(jobs)} realizations to {self.config.queue}")
        for r, job in enumerate(jobs):
            while not job.is_finished:
                if job.is_failed:
                    raise SolverError(f"realization {r} failed:\n{job.exc_info}")
                time.sleep(POLL_INTERVAL)
                job.refresh()
            yield job.result

    def run(self, out=None):
        """Writes the CSV to out as realizations complete; returns the collected table."""
        table = sweep_table()
        if out is not None:
            table.write_csv(out)
        for rows in self.realizations():
            chunk = sweep_table()
            chunk.extend(rows)
            if out is not None:
                chunk.write_csv(out, header=False)
                out.flush()
            table.extend(rows)
        return table
