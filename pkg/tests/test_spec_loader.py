"""Unit tests for ForkSpec JSON loading and named inputs."""

import json
import tempfile
import unittest
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.errors import ValidationError
from src.forking_engine import ControlKind, ProjectiveMeasurement, run
from src.gates_channels import H, X, Z
from src.spec_loader import (
    SpecLoader,
    channel_from_name,
    load_spec,
    parse_channel,
    parse_operator,
    parse_state,
    single_qubit_state,
    two_qubit_state,
)

SPECS = Path(__file__).parent.parent / 'specs'


def minimal_spec(**overrides):
    data = {
        "d": 2, "q": 1,
        "control": {"type": "pure", "weights": [0.5, 0.5]},
        "target_state": {"basis": 0},
        "pipelines": [[[{"gate": "H"}], []]],
        "measurement": {"observable": {"gate": "Z"}},
    }
    data.update(overrides)
    return data


class TestBundledSpecs(unittest.TestCase):
    """Test the example spec files shipped in specs/."""

    def test_linear_sum(self):
        """Test the linear H-versus-identity spec evaluates to 0.5."""
        spec = load_spec(SPECS / 'linear_sum.json')
        result = run(spec)
        self.assertAlmostEqual(result.value, 0.5, places=12)
        self.assertEqual(result.ir.cswap_count, 2)

    def test_quadratic_sum(self):
        """Test the q=2 spec with a basis and a mixed ancilla evaluates to 0.5."""
        spec = load_spec(SPECS / 'quadratic_sum.json')
        self.assertFalse(spec.ancilla_states[1].is_pure)
        self.assertAlmostEqual(run(spec).value, 0.5, places=12)

    def test_projective_noisy_control(self):
        """Test the projective spec with a dephased control evaluates to 0.625."""
        spec = load_spec(SPECS / 'projective_noisy_control.json')
        self.assertIsInstance(spec.measurement, ProjectiveMeasurement)
        self.assertEqual(spec.control.kind, ControlKind.MIXED)
        self.assertAlmostEqual(run(spec).value, 0.625, places=12)


class TestParsing(unittest.TestCase):
    """Test the reference parsers."""

    def test_operators(self):
        """Test gate, rotation, Pauli string and complex matrix entries."""
        np.testing.assert_array_equal(parse_operator({"gate": "h"}), H)
        np.testing.assert_allclose(parse_operator({"gate": "RX", "theta": np.pi}), -1j * X, atol=1e-15)
        np.testing.assert_array_equal(parse_operator({"pauli": "XZ"}), np.kron(X, Z))
        np.testing.assert_array_equal(parse_operator({"matrix": [[0, [0, -1]], [[0, 1], 0]]}),
                                      np.array([[0, -1j], [1j, 0]]))

    def test_channels(self):
        """Test named channels pick up parameters and dimension."""
        self.assertEqual(parse_channel({"channel": "dephasing", "p": 0.25}, 2).channel_id, "dephasing(0.25)")
        self.assertEqual(parse_channel({"channel": "dephasing", "p": 0.25}, 3).dim, 3)
        self.assertEqual(parse_channel({"gate": "H"}, 2).channel_id, "H")
        kraus = parse_channel({"kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}, 2)
        self.assertEqual(len(kraus.kraus_ops), 2)

    def test_states(self):
        """Test basis, vector and maximally mixed states."""
        self.assertEqual(parse_state({"basis": 2}, 3).dim, 3)
        self.assertFalse(parse_state({"maximally_mixed": True}, 2).is_pure)
        with self.assertRaises(ValidationError):
            parse_state({"basis": 2}, 2)

    def test_encoded_control(self):
        """Test an encoded control built from a list of gate refs."""
        data = minimal_spec(d=3, pipelines=[[[], [], []]],
                            control={"type": "encoded", "prep": [{"gate": "H"}, {"gate": "H"}],
                                     "branch_sets": [[0], [1, 2], [3]]})
        spec = SpecLoader().parse(data)
        np.testing.assert_allclose(spec.control.weights, [0.25, 0.5, 0.25])

    def test_missing_pipelines_default_empty(self):
        """Test absent pipelines leave every slot untouched."""
        spec = SpecLoader().parse(minimal_spec(pipelines=None))
        self.assertAlmostEqual(run(spec).value, 1.0, places=12)


class TestErrors(unittest.TestCase):
    """Test errors name the offending field."""

    def assertFieldError(self, data, fragment):
        with self.assertRaises(ValidationError) as ctx:
            SpecLoader().parse(data)
        self.assertIn(fragment, str(ctx.exception))

    def test_missing_key(self):
        """Test a missing control reports its path."""
        data = minimal_spec()
        del data['control']
        self.assertFieldError(data, 'spec.control')

    def test_bad_types(self):
        """Test wrongly typed fields report their paths."""
        self.assertFieldError(minimal_spec(d="two"), 'spec.d')
        self.assertFieldError(minimal_spec(pipelines=[[[{"gate": "Q"}], []]]), 'pipelines[0][0][0]')
        self.assertFieldError(minimal_spec(control={"type": "cat"}), 'control.type')
        self.assertFieldError(minimal_spec(measurement={"type": "weak"}), 'measurement.type')

    def test_bad_channel_parameter(self):
        """Test an out-of-range channel parameter is rejected with its path."""
        data = minimal_spec(pipelines=[[[{"channel": "dephasing", "p": 2}], []]])
        self.assertFieldError(data, 'pipelines[0][0][0]')

    def test_missing_and_malformed_files(self):
        """Test missing files and invalid JSON."""
        with self.assertRaises(FileNotFoundError):
            load_spec('/nonexistent/spec.json')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.json'
            path.write_text('{"d": 2,')
            with self.assertRaises(ValidationError):
                load_spec(path)
            path.write_text(json.dumps(minimal_spec()))
            self.assertAlmostEqual(run(load_spec(path)).value, 0.5, places=12)


class TestNamedInputs(unittest.TestCase):
    """Test named states and channel shorthands."""

    def test_two_qubit_states(self):
        """Test Bell states and seeded random states."""
        phi = two_qubit_state('phi+')
        np.testing.assert_allclose(phi.data, np.array([1, 0, 0, 1]) / np.sqrt(2))
        a = two_qubit_state('random', seed=3)
        b = two_qubit_state('random', seed=3)
        np.testing.assert_array_equal(a.data, b.data)
        self.assertFalse(two_qubit_state('random-mixed', seed=3).is_pure)
        with self.assertRaises(ValidationError):
            two_qubit_state('ghz')

    def test_single_qubit_states(self):
        """Test named qubit states."""
        np.testing.assert_allclose(single_qubit_state('-i').data, np.array([1, -1j]) / np.sqrt(2))
        self.assertFalse(single_qubit_state('mixed').is_pure)
        with self.assertRaises(ValidationError):
            single_qubit_state('2')

    def test_channel_from_name(self):
        """Test CLI channel shorthands."""
        self.assertEqual(channel_from_name('amplitude_damping', 0.5).channel_id, "amplitude_damping(0.5)")
        self.assertEqual(channel_from_name('identity').channel_id, "identity")
        with self.assertRaises(ValidationError):
            channel_from_name('erasure', 0.1)


if __name__ == '__main__':
    unittest.main()
