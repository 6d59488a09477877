from cli.base import SolverCommand, add_json_argument
from solver.errors import NumericalFailure
from solver.rateadapt import brute_force_reward, load_rewards, solve_reward_dp


class Command(SolverCommand):
    help = 'Maximum total reward over time-frequency allocations'

    def add_arguments(self, parser):
        parser.add_argument('--rewards', required=True, help='reward tensor JSON')
        parser.add_argument('--brute-force', action='store_true', help='cross-check by enumeration')
        add_json_argument(parser)

    def solve(self, **opts):
        rewards, widths, tau = load_rewards(opts['rewards'])
        solution = solve_reward_dp(rewards, widths, tau)
        lines = [f"reward {solution.value:.12g} ({solution.evaluations} evaluations)"]
        for j, allocation in enumerate(solution.allocation):
            lines.append(f"client {j}: {' '.join(map(str, allocation))}")

        if opts['brute_force']:
            value = brute_force_reward(rewards, widths, tau)
            if abs(value - solution.value) > 1e-9:
                raise NumericalFailure(f"dynamic program {solution.value} differs from enumeration {value}")
            lines.append(f"enumeration {value:.12g}")
        self.emit(opts, solution, "\n".join(lines))
