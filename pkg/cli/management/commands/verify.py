from cli.base import SolverCommand, add_instance_arguments, add_json_argument, add_search_argument, instance_from
from solver.errors import BoundViolation
from solver.results import gap_table
from solver.simulate import load_fsmc
from solver import verify


class Command(SolverCommand):
    help = 'Check the capacity bounds on an instance or on a tightness construction'

    def add_arguments(self, parser):
        add_instance_arguments(parser)
        add_search_argument(parser)
        add_json_argument(parser)
        parser.add_argument('--output', help='gap report CSV path, stdout when omitted')
        parser.add_argument('--fsmc', help='check the stationary averages of an FSMC instead')
        parser.add_argument('--tight-upper', nargs=3, metavar=('N', 'C_DET', 'EPSILON'))
        parser.add_argument('--tight-lower', nargs=2, type=int, metavar=('N', 'C_DET'))
        parser.add_argument('--construction-tau', type=int, help='interval length of the construction')
        parser.add_argument('--lemma', nargs='+', type=float, metavar='P',
                            help='check the single-AP bounds for these success probabilities and --tau')
        parser.add_argument('--policy-checks', action='store_true',
                            help='also check the T3 of the policies built from the relaxation')

    def solve(self, **opts):
        if opts['lemma']:
            check = verify.lemma_bounds_check(opts['lemma'], opts['tau'])
            self.emit(opts, check, f"l={check.l} E[Y]={check.expected:.12g} "
                                   f"in ({check.lower:.6g}, {check.upper:.6g}): {check.within}")
            if not check.within or not check.sum_bound:
                raise BoundViolation("single-AP bounds violated")
            return

        if opts['tight_lower']:
            n, c_det = opts['tight_lower']
            instance, gap = verify.tight_lower_instance(n, c_det, opts['construction_tau'])
            measured = verify.check_tight_lower(instance, gap, c_det)
            self.emit(opts, {'closed_form': gap, 'measured': measured},
                      f"closed form {gap:.12g}, measured {measured:.12g}")
            return

        if opts['tight_upper']:
            n, c_det, epsilon = int(opts['tight_upper'][0]), int(opts['tight_upper'][1]), float(opts['tight_upper'][2])
            instance = verify.tight_upper_instance(n, c_det, epsilon, opts['construction_tau'])
            report = verify.check_tight_upper(instance, c_det, epsilon)
        elif opts['fsmc']:
            report = verify.fsmc_gap_report(load_fsmc(opts['fsmc']), opts['tau'], opts['search'])
        else:
            instance = instance_from(opts)
            instance_id = None if opts['seed'] is None else str(opts['seed'])
            report = verify.gap_report(instance, opts['search'], instance_id)
            if opts['policy_checks']:
                for check in [verify.gap_policy_check(instance, opts['search']),
                              verify.rounded_policy_check(instance, opts['search'])]:
                    self.stderr.write(f"policy T3 {check.value:.6f} >= {check.threshold:.6f} "
                                      f"(applicable {check.applicable}): {check.ok}")
                    if not check.ok:
                        raise BoundViolation(f"policy T3 {check.value} below {check.threshold}")

        self.emit_table(opts, gap_table([report]))
        if not report.satisfied:
            raise BoundViolation(f"C_T3={report.c_t3} outside ({report.lower_bound}, {report.upper_bound})")
