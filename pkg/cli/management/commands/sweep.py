import logging

from cli.base import SolverCommand
from solver.errors import InvalidInstance
from solver.sweep import Sweep, SweepConfig, gap_summary, preset_names

logger = logging.getLogger("cli")


class Command(SolverCommand):
    help = 'Run a seeded sweep over random geometric instances'

    def add_arguments(self, parser):
        parser.add_argument('--config', help='sweep YAML')
        parser.add_argument('--preset', help=f'named sweep configuration ({", ".join(preset_names())})')
        parser.add_argument('--seed', type=int, help='override seed_base')
        parser.add_argument('--realizations', type=int, help='override the number of realizations')
        parser.add_argument('--queue', help='distribute realizations to this rq queue')
        parser.add_argument('--output', help='CSV path, stdout when omitted')
        parser.add_argument('--json', metavar='PATH', help='also write the rows as JSON')

    def solve(self, **opts):
        if bool(opts['config']) == bool(opts['preset']):
            raise InvalidInstance("exactly one of --config and --preset is required")
        config = SweepConfig.from_yaml(opts['config']) if opts['config'] else SweepConfig.preset(opts['preset'])
        if opts['seed'] is not None:
            config.parse_conf_seed_base(opts['seed'])
        if opts['realizations'] is not None:
            config.parse_conf_realizations(opts['realizations'])
        if opts['queue']:
            config.parse_conf_queue(opts['queue'])

        logger.info(f"sweep of {config.realizations} realizations, modes {', '.join(config.modes) or '-'}")
        if opts['output']:
            with open(opts['output'], 'w') as out:
                table = Sweep(config).run(out)
        else:
            table = Sweep(config).run(self.stdout)
        if opts['json']:
            table.save(opts['json'])

        summary = gap_summary(table)
        if summary:
            logger.info(str(summary))
            self.stderr.write(str(summary))
