from cli.base import (SolverCommand, add_instance_arguments, add_json_argument, add_search_argument, instance_from,
                      require_seed)
from solver.online import Exact, Simulated, compare, greedy_policy_value
from solver.results import online_table


class Command(SolverCommand):
    help = 'Value of the greedy online heuristic'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_search_argument(parser)
        add_json_argument(parser)
        parser.add_argument('--simulate', type=int, metavar='INTERVALS',
                            help='estimate by simulation instead of the exact forward pass')
        parser.add_argument('--compare', action='store_true',
                            help='write optimal online, greedy heuristic and best split as CSV')
        parser.add_argument('--output', help='CSV path for --compare, stdout when omitted')

    def solve(self, **opts):
        instance = instance_from(opts)
        if opts['compare']:
            self.emit_table(opts, online_table([(opts['seed'], compare(instance, opts['search']))]))
            return

        mode = Exact()
        if opts['simulate']:
            mode = Simulated(intervals=opts['simulate'], seed=require_seed(opts, "with --simulate"))
        value = greedy_policy_value(instance, mode)
        self.emit(opts, {'greedy_heuristic': value}, f"greedy heuristic {value:.12g}")
