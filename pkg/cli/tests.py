import io
import json
import os
import tempfile

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from solver.model import build_instance, load_instance, save_instance
from solver.rateadapt import RewardFile
import serde.json

FOOTNOTE = [[0.5, 0.5], [0.5, 0.5]]


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.footnote = self.path('footnote.json')
        save_instance(build_instance(2, 2, 1, FOOTNOTE), self.footnote)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def call(self, *args):
        out, err = io.StringIO(), io.StringIO()
        call_command(*args, stdout=out, stderr=err)
        return out.getvalue()

    def assertExit(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args)
        self.assertEqual(ctx.exception.returncode, code)


class SolveTest(CommandTestCase):
    def test_footnote(self):
        out = self.call('solve', '--instance', self.footnote)
        self.assertIn("C_T3 1\n", out)
        self.assertIn("AP 0: 0 (0.5)", out)

    def test_json(self):
        self.call('solve', '--instance', self.footnote, '--search', 'bnb', '--json', self.path('result.json'))
        with open(self.path('result.json')) as f:
            self.assertEqual(json.load(f)['value'], 1.0)

    def test_missing_instance(self):
        self.assertExit(2, 'solve')
        self.assertExit(2, 'solve', '--instance', self.path('missing.json'))

    def test_budget(self):
        self.assertExit(3, 'solve', '--seed', '1', '--clients', '30', '--tau', '5')

    def test_invalid_dimensions(self):
        path = self.path('bad.json')
        with open(path, 'w') as f:
            json.dump({'n_aps': 2, 'n_clients': 3, 'tau': 5, 'success': [[0.5, 0.2], [0.1, 0.9]]}, f)
        self.assertExit(2, 'solve', '--instance', path)


class GenTest(CommandTestCase):
    def test_gen(self):
        path = self.path('instance.json')
        self.call('gen', '--seed', '4', '--clients', '6', '--tau', '7', '--output', path)
        instance = load_instance(path)
        self.assertEqual((instance.n_aps, instance.n_clients, instance.tau), (2, 6, 7))
        self.assertIsNotNone(instance.geometry)

    def test_seed_required(self):
        self.assertExit(2, 'gen', '--clients', '6', '--output', self.path('instance.json'))
        self.assertFalse(os.path.exists(self.path('instance.json')))


class RelaxTest(CommandTestCase):
    def test_lp(self):
        out = self.call('lp', '--instance', self.footnote)
        self.assertIn("C_det 0 (brute-force)", out)
        self.assertIn("LP 1 ", out)

    def test_round(self):
        out = self.call('round', '--instance', self.footnote)
        self.assertIn("rounded 0\n", out)
        self.assertIn("T3 1\n", out)


class OnlineTest(CommandTestCase):
    def test_mdp(self):
        self.assertIn("optimal online 1", self.call('mdp', '--instance', self.footnote))

    def test_compare(self):
        out = self.call('mdp', '--instance', self.footnote, '--compare')
        self.assertEqual(out.splitlines()[0], "instance_id,optimal_online,greedy_heuristic,best_split")
        self.assertTrue(out.splitlines()[1].endswith(",1.0,1.0,1.0"))

    def test_greedy(self):
        self.assertIn("greedy heuristic 1", self.call('greedy', '--instance', self.footnote))
        simulated = self.call('greedy', '--instance', self.footnote, '--simulate', '50', '--seed', '2')
        self.assertIn("greedy heuristic ", simulated)
        self.assertExit(2, 'greedy', '--instance', self.footnote, '--simulate', '50')

    def test_region(self):
        lines = self.call('region', '--instance', self.footnote).splitlines()
        self.assertEqual(sorted(lines), ["0 0.75", "0.5 0.5", "0.75 0"])


class SimulateTest(CommandTestCase):
    def test_partition(self):
        out = self.call('simulate', '--instance', self.footnote, '--partition', '0,1', '--intervals', '100',
                        '--seed', '1')
        lines = out.splitlines()
        self.assertEqual(lines[0], "client_id,delivered,intervals")
        self.assertEqual(len(lines), 3)

    def test_invalid_partition(self):
        self.assertExit(2, 'simulate', '--instance', self.footnote, '--partition', '0', '--intervals', '10',
                        '--seed', '1')

    def test_seed_required(self):
        self.assertExit(2, 'simulate', '--instance', self.footnote, '--partition', '0,1', '--intervals', '10')


class RateAdaptTest(CommandTestCase):
    def test_rewards(self):
        path = self.path('rewards.json')
        with open(path, 'w') as f:
            f.write(serde.json.to_json(RewardFile(widths=[1], tau=2, rewards=[[0, 1, 1.5], [0, 1, 1.2]])))
        out = self.call('rateadapt', '--rewards', path, '--brute-force')
        self.assertIn("reward 2 ", out)
        self.assertIn("client 1: 1", out)
        self.assertIn("enumeration 2", out)


class VerifyTest(CommandTestCase):
    def test_instance(self):
        out = self.call('verify', '--instance', self.footnote)
        self.assertEqual(out.splitlines()[1], ",1.0,0.0,-2.0,2.0,True")

    def test_tight_lower(self):
        self.assertIn("closed form 0.375", self.call('verify', '--tight-lower', '1', '2'))

    def test_lemma(self):
        out = self.call('verify', '--lemma', '0.5', '0.5', '--tau', '4')
        self.assertIn("l=2 E[Y]=1.625", out)


class SweepTest(CommandTestCase):
    def write_config(self, text):
        path = self.path('sweep.yml')
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_header_only(self):
        config = self.write_config("realizations: 1\nmodes: []\n")
        output = self.path('out.csv')
        self.call('sweep', '--config', config, '--output', output)
        with open(output) as f:
            self.assertEqual(f.read(), "realization,mode,value,runtime_ms,seed\n")

    def test_invalid_tau(self):
        config = self.write_config("realizations: 1\ntau: 0\nmodes: [exact]\n")
        output = self.path('out.csv')
        self.assertExit(2, 'sweep', '--config', config, '--output', output)
        self.assertFalse(os.path.exists(output))

    def test_config_or_preset(self):
        self.assertExit(2, 'sweep')
        self.assertExit(2, 'sweep', '--preset', 'nonexistent')

    def test_reproducible(self):
        config = self.write_config("realizations: 2\nseed_base: 3\nm: 4\ntau: 4\nmodes: [exact, relax, round]\n")
        self.assertEqual(self.call('sweep', '--config', config), self.call('sweep', '--config', config))

    def test_gap_summary(self):
        config = self.write_config("realizations: 3\nseed_base: 3\nm: 4\ntau: 4\nmodes: [exact, relax]\n")
        out, err = io.StringIO(), io.StringIO()
        call_command('sweep', '--config', config, stdout=out, stderr=err)
        self.assertIn("median |C_T3 - C_det| ", err.getvalue())
        self.assertIn(" over 3 realizations", err.getvalue())
        self.assertEqual(len(out.getvalue().splitlines()), 7)
