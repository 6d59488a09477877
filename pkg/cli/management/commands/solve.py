from cli.base import SolverCommand, add_instance_arguments, add_json_argument, add_search_argument, instance_from
from solver.exact import exact_capacity, interval_variance, per_client_throughput


class Command(SolverCommand):
    help = 'Exact C_T3 and its best greedy static partition'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_search_argument(parser)
        add_json_argument(parser)

    def solve(self, **opts):
        instance = instance_from(opts)
        result = exact_capacity(instance, opts['search'])
        partition = result.best_partition

        lines = [
            f"C_T3 {result.value:.12g}",
            f"search {result.search}, {result.evaluations} subset evaluations",
        ]
        if not instance.empty:
            throughput = per_client_throughput(instance, partition)
            lines.append(f"variance {interval_variance(instance, partition):.12g}")
            for ap, order in enumerate(partition.order):
                lines.append(f"AP {ap}: {' '.join(map(str, order)) or '-'} ({result.per_ap_expected[ap]:.12g})")
            lines.append("throughput " + " ".join(f"{t:.6f}" for t in throughput))
        self.emit(opts, result, "\n".join(lines))
