from cli.base import SolverCommand, add_instance_arguments, add_json_argument, instance_from
from solver.exact import evaluate_partition
from solver.relax import completed_partition, round_down, solve_lp_relaxation


class Command(SolverCommand):
    help = 'Round the basic LP solution down and evaluate the resulting policy'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_json_argument(parser)

    def solve(self, **opts):
        instance = instance_from(opts)
        rounded = round_down(solve_lp_relaxation(instance))
        partition = completed_partition(rounded, instance)
        value = evaluate_partition(instance, partition)

        lines = [f"rounded {rounded.objective:.12g}", f"T3 {value:.12g}"]
        for ap, order in enumerate(partition.order):
            lines.append(f"AP {ap}: {' '.join(map(str, order)) or '-'}")
        self.emit(opts, {'rounded': rounded, 'partition': partition, 't3': value}, "\n".join(lines))
