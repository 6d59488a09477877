from cli.base import SolverCommand, add_instance_arguments, add_json_argument, instance_from
from solver.relax import solve_gap_exact, solve_lp_relaxation


class Command(SolverCommand):
    help = 'C_det and the basic optimal solution of its LP relaxation'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_json_argument(parser)

    def solve(self, **opts):
        instance = instance_from(opts)
        gap = solve_gap_exact(instance)
        lp = solve_lp_relaxation(instance)

        lines = [
            f"C_det {gap.objective:.12g} ({gap.method})",
            f"LP {lp.objective:.12g} after {lp.pivots} pivots",
        ]
        for k, clients in enumerate(lp.z_sets, start=1):
            lines.append(f"Z{k}: {' '.join(map(str, clients)) or '-'}")
        self.emit(opts, {'gap': gap, 'lp': lp}, "\n".join(lines))
