from timely import settings

from cli.base import SolverCommand, add_instance_arguments, add_json_argument, instance_from, require_seed
from solver.exact import interval_variance
from solver.model import Partition
from solver.relax import completed_partition, solve_gap_exact
from solver.results import metrics_table
from solver.simulate import load_fsmc, optimal_partitions, simulate_fsmc, simulate_static


class Command(SolverCommand):
    help = 'Monte Carlo simulation of a greedy static policy, static or FSMC-driven'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_json_argument(parser)
        parser.add_argument('--intervals', type=int, default=settings.TT_SIMULATION_INTERVALS)
        parser.add_argument('--partition', help='comma separated AP of every client, -1 for unserved; '
                                                'the relaxed assignment when omitted')
        parser.add_argument('--fsmc', help='FSMC JSON; every state is served by its optimal partition')
        parser.add_argument('--output', help='per-client CSV path, stdout when omitted')

    def solve(self, **opts):
        seed = require_seed(opts, "to simulate")
        if opts['fsmc']:
            fsmc = load_fsmc(opts['fsmc'])
            partitions = optimal_partitions(fsmc, opts['tau'])
            metrics = simulate_fsmc(fsmc, partitions, opts['tau'], opts['intervals'], seed)
        else:
            instance = instance_from(opts)
            if opts['partition']:
                owner = [int(x) for x in opts['partition'].split(',')]
                partition = Partition.from_owner(instance, owner)
            else:
                partition = completed_partition(solve_gap_exact(instance), instance)
            metrics = simulate_static(instance, partition, opts['intervals'], seed)
            self.stderr.write(f"exact per-interval variance {interval_variance(instance, partition):.6g}")

        self.stderr.write(f"T3 estimate {metrics.t3_estimate:.6f} +- {metrics.std_error:.6f} "
                          f"over {metrics.intervals_run} intervals")
        self.emit_table({**opts, 'json': None}, metrics_table(metrics))
        if opts['json']:
            self.write_serde(metrics, opts['json'])
