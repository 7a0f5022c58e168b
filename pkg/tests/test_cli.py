"""Tests for the command-line entry point."""

import json
import tempfile
import unittest
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.__main__ import main

GOLDEN = Path(__file__).parent / 'golden'
SPECS = Path(__file__).parent.parent / 'specs'


class CliTestCase(unittest.TestCase):
    """Runs main() with --output pointing into a temporary directory."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def run_cli(self, *argv, name='out.txt'):
        path = self.tmp / name
        code = main(['--output', str(path)] + list(argv))
        text = path.read_text(encoding='utf-8') if path.exists() else None
        return code, text

    def assertGolden(self, text, golden_name):
        self.assertEqual(text, (GOLDEN / golden_name).read_text(encoding='utf-8'))


class TestGoldenArtifacts(CliTestCase):
    """Test byte-exact artifacts for fixed inputs."""

    def test_witness_states(self):
        """Test witness JSON for phi+, 00 and psi-."""
        for state, golden in (('phi+', 'witness_phi_plus.json'), ('00', 'witness_00.json'),
                              ('psi-', 'witness_psi_minus.json')):
            with self.subTest(state=state):
                code, text = self.run_cli('witness', '--state', state)
                self.assertEqual(code, 0)
                self.assertGolden(text, golden)

    def test_purity_identity(self):
        """Test purity JSON of the identity channel on |0>."""
        code, text = self.run_cli('purity', '--channel', 'identity', '--state', '0')
        self.assertEqual(code, 0)
        self.assertGolden(text, 'purity_identity.json')

    def test_axis_sweep_z(self):
        """Test the exact z-axis sweep is flat at 0.5."""
        code, text = self.run_cli('axis-sweep', '--axis', 'z', '--steps', '17')
        self.assertEqual(code, 0)
        self.assertGolden(text, 'axis_z.csv')


class TestCommands(CliTestCase):
    """Test the remaining commands."""

    def test_purity_modes_agree(self):
        """Test qutrit and two-qubit controls give the same purity."""
        results = []
        for mode in ('qutrit', 'two_qubit'):
            code, text = self.run_cli('purity', '--channel', 'depolarizing', '--param', '0.4',
                                      '--state', '+', '--mode', mode)
            self.assertEqual(code, 0)
            results.append(json.loads(text))
        self.assertAlmostEqual(results[0]['purity_sum'], 0.36, places=9)
        self.assertAlmostEqual(results[1]['purity_sum'], results[0]['purity_sum'], places=9)

    def test_twirl_matches_oracle(self):
        """Test the Pauli-twirled damping value against the term-by-term oracle."""
        code, text = self.run_cli('twirl', '--channel', 'amplitude_damping', '--param', '0.3')
        self.assertEqual(code, 0)
        data = json.loads(text)
        self.assertEqual(data['size'], 4)
        self.assertAlmostEqual(data['qfs_value'], data['oracle_value'], places=9)
        self.assertAlmostEqual(data['qfs_value'], 0.7, places=9)

    def test_random_twirl(self):
        """Test a random twirl set of three unitaries."""
        code, text = self.run_cli('twirl', '--twirl-set', 'random', '--size', '3', '--param', '0.5',
                                  '--observable', 'x', '--state', '+', '--seed', '4')
        self.assertEqual(code, 0)
        data = json.loads(text)
        self.assertEqual(data['observable'], 'X')
        self.assertAlmostEqual(data['qfs_value'], data['oracle_value'], places=9)

    def test_run_spec(self):
        """Test run-spec reports the value, c-swap count, estimate and IR."""
        code, text = self.run_cli('run-spec', str(SPECS / 'linear_sum.json'), '--shots', '4096')
        self.assertEqual(code, 0)
        data = json.loads(text)
        self.assertEqual(list(data), ['value', 'cswap_count', 'estimate', 'ir'])
        self.assertEqual(data['value'], 0.5)
        self.assertEqual(data['cswap_count'], 2)
        self.assertEqual(data['estimate']['prep_count'], 4096)
        self.assertLess(abs(data['estimate']['mean'] - 0.5), 5 * data['estimate']['stderr'])

    def test_complexity_csv(self):
        """Test the complexity command writes one CSV row per epsilon."""
        code, text = self.run_cli('complexity', '--d', '2', '--epsilon', '0.2', '0.1', '--repetitions', '50')
        self.assertEqual(code, 0)
        lines = text.splitlines()
        self.assertEqual(lines[0], 'epsilon,naive_preps,qfs_preps,ratio')
        self.assertEqual(len(lines), 3)

    def test_sampled_sweep_reproducible(self):
        """Test a seeded sampled sweep writes identical bytes twice."""
        argv = ('axis-sweep', '--axis', 'y', '--steps', '5', '--shots', '256', '--seed', '11',
                '--direction', 'all')
        _, first = self.run_cli(*argv, name='a.csv')
        _, second = self.run_cli(*argv, name='b.csv')
        self.assertEqual(first, second)
        self.assertEqual(first.splitlines()[0], 'theta,exact,sampled,theory')

    def test_random_direction_permutes_rows(self):
        """Test the random order lists every angle exactly once."""
        code, text = self.run_cli('axis-sweep', '--axis', 'x', '--steps', '9', '--direction', 'random')
        self.assertEqual(code, 0)
        thetas = sorted(float(line.split(',')[0]) for line in text.splitlines()[1:])
        self.assertEqual(len(thetas), 9)
        self.assertEqual(thetas[0], 0.0)


class TestExitCodes(CliTestCase):
    """Test error reporting through exit codes."""

    def test_invalid_input(self):
        """Test unknown states and bad sizes exit with 2."""
        self.assertEqual(self.run_cli('witness', '--state', 'ghz')[0], 2)
        self.assertEqual(self.run_cli('twirl', '--size', '0')[0], 2)
        self.assertEqual(self.run_cli('axis-sweep', '--axis', 'x', '--steps', '1')[0], 2)

    def test_missing_spec_file(self):
        """Test a missing spec file exits with 2 and writes nothing."""
        code, text = self.run_cli('run-spec', str(self.tmp / 'missing.json'))
        self.assertEqual(code, 2)
        self.assertIsNone(text)

    def test_dimension_limit(self):
        """Test a register beyond the pure cap exits with 3."""
        path = self.tmp / 'big.json'
        path.write_text(json.dumps({
            "d": 5, "q": 3,
            "control": {"type": "uniform"},
            "target_state": {"basis": 0},
            "measurement": {"observable": {"gate": "Z"}},
        }))
        self.assertEqual(self.run_cli('run-spec', str(path))[0], 3)

    def test_non_positive_shots(self):
        """Test --shots 0 and negative values exit with 2 for both sampling commands."""
        for shots in ('0', '-5'):
            with self.subTest(shots=shots):
                code, text = self.run_cli('axis-sweep', '--axis', 'x', '--steps', '3', '--shots', shots)
                self.assertEqual(code, 2)
                self.assertIsNone(text)
                code, text = self.run_cli('run-spec', str(SPECS / 'linear_sum.json'), '--shots', shots)
                self.assertEqual(code, 2)
                self.assertIsNone(text)

    def test_config_missing_section(self):
        """Test a config file lacking a required section exits with 2."""
        path = self.tmp / 'partial.yaml'
        path.write_text('limits:\n  max_pure_dim: 64\n  max_density_dim: 16\n')
        self.assertEqual(main(['--config', str(path), 'witness']), 2)

    def test_no_command(self):
        """Test running without a command exits with 2."""
        self.assertEqual(main([]), 2)


if __name__ == '__main__':
    unittest.main()
