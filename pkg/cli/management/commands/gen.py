from cli.base import SolverCommand, add_instance_arguments, require_seed
from solver.model import generate_geometric_instance


class Command(SolverCommand):
    help = 'Generate a random two-AP geometric instance'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        parser.add_argument('--output', help='instance JSON path, stdout when omitted')

    def solve(self, **opts):
        seed = require_seed(opts, "to generate an instance")
        instance, _ = generate_geometric_instance(seed, opts['clients'], opts['tau'])
        self.write_serde(instance, opts['output'])
