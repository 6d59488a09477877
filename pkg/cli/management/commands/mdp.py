from cli.base import SolverCommand, add_instance_arguments, add_json_argument, add_search_argument, instance_from
from solver.online import compare, mdp_optimal_value
from solver.results import online_table


class Command(SolverCommand):
    help = 'Optimal coordinated online value by backward induction'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_search_argument(parser)
        add_json_argument(parser)
        parser.add_argument('--compare', action='store_true',
                            help='write optimal online, greedy heuristic and best split as CSV')
        parser.add_argument('--output', help='CSV path for --compare, stdout when omitted')

    def solve(self, **opts):
        instance = instance_from(opts)
        if opts['compare']:
            self.emit_table(opts, online_table([(opts['seed'], compare(instance, opts['search']))]))
            return
        value = mdp_optimal_value(instance)
        self.emit(opts, {'optimal_online': value}, f"optimal online {value:.12g}")
