import serde.json
from django.core.management.base import BaseCommand, CommandError

from solver.errors import BudgetExceeded, InvalidInstance, SolverError
from solver.exact import Search
from solver.model import generate_geometric_instance, load_instance
from solver.results import save_json

VALIDATION_EXIT = 2
BUDGET_EXIT = 3


def add_instance_arguments(parser):
    parser.add_argument('--instance', help='instance JSON written by the gen command')
    parser.add_argument('--seed', type=int, help='generate the geometric instance from this seed')
    parser.add_argument('--clients', type=int, default=10, help='number of generated clients')
    parser.add_argument('--tau', type=int, default=15, help='interval length of the generated instance')


def add_search_argument(parser):
    parser.add_argument('--search', choices=[s.value for s in Search], default=Search.EXHAUSTIVE.value,
                        help='exact C_T3 search strategy')


def add_json_argument(parser):
    parser.add_argument('--json', metavar='PATH', help='also write the result as JSON')


def require_seed(opts, reason):
    if opts.get('seed') is None:
        raise InvalidInstance(f"--seed is required {reason}")
    return opts['seed']


def instance_from(opts):
    if opts.get('instance'):
        return load_instance(opts['instance'])
    if opts.get('seed') is None:
        raise InvalidInstance("either --instance or --seed is required")
    instance, _ = generate_geometric_instance(opts['seed'], opts['clients'], opts['tau'])
    return instance


class SolverCommand(BaseCommand):
    """Runs solve() and maps solver errors onto exit codes."""

    def handle(self, *args, **opts):
        try:
            self.solve(**opts)
        except InvalidInstance as e:
            raise CommandError(str(e), returncode=VALIDATION_EXIT)
        except BudgetExceeded as e:
            raise CommandError(str(e), returncode=BUDGET_EXIT)
        except SolverError as e:
            raise CommandError(str(e), returncode=1)
        except FileNotFoundError as e:
            raise CommandError(str(e), returncode=VALIDATION_EXIT)

    def solve(self, **opts):
        raise NotImplementedError

    def emit(self, opts, result, text):
        self.stdout.write(text)
        if opts.get('json'):
            save_json(result, opts['json'])

    def emit_table(self, opts, table):
        if opts.get('output'):
            with open(opts['output'], 'w') as f:
                table.write_csv(f)
        else:
            self.stdout.write(table.csv(), ending='')
        if opts.get('json'):
            table.save(opts['json'])

    def write_serde(self, obj, path=None):
        data = serde.json.to_json(obj)
        if path:
            with open(path, 'w') as f:
                f.write(data)
        else:
            self.stdout.write(data)
