"""ForkSpec JSON files and named states.

Complex numbers are written as plain numbers or ``[re, im]`` pairs; matrices
are lists of rows. Channels are referenced by registry name plus parameters,
or given as raw Kraus lists::

    {"gate": "H"}                      {"gate": "RY", "theta": 0.5}
    {"pauli": "XZ"}                    {"matrix": [[0, 1], [1, 0]]}
    {"channel": "dephasing", "p": 0.2} {"channel": "amplitude_damping", "gamma": 0.1}
    {"kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}

A spec file holds ``d``, ``q``, ``slot_radix``, ``control``,
``target_state``, optional ``ancilla_states``, ``pipelines`` (q lists of d
lists of channel refs), ``measurement`` and optional ``control_pipeline``.
See specs/ for complete examples.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from src.errors import ValidationError
from src.forking_engine import (
    ControlSpec,
    ExpectationMeasurement,
    ForkSpec,
    ProjectiveMeasurement,
    empty_pipelines,
)
from src.gates_channels import (
    H,
    I2,
    S,
    SDG,
    X,
    Y,
    Z,
    Channel,
    amplitude_damping,
    dephasing,
    depolarizing,
    identity_channel,
    pauli_string,
    qudit_dephasing,
    rx,
    ry,
    rz,
    unitary_channel,
)
from src.quantum_state import QuantumState
from src.random_ops import random_density, random_pure_state
from src.tensor_core import kron_all

logger = logging.getLogger(__name__)

GATES = {'I': I2, 'X': X, 'Y': Y, 'Z': Z, 'H': H, 'S': S, 'SDG': SDG}
ROTATIONS = {'RX': rx, 'RY': ry, 'RZ': rz}

_SQRT_HALF = 1 / np.sqrt(2)
NAMED_TWO_QUBIT_STATES = {
    'phi+': np.array([_SQRT_HALF, 0, 0, _SQRT_HALF], dtype=complex),
    'phi-': np.array([_SQRT_HALF, 0, 0, -_SQRT_HALF], dtype=complex),
    'psi+': np.array([0, _SQRT_HALF, _SQRT_HALF, 0], dtype=complex),
    'psi-': np.array([0, _SQRT_HALF, -_SQRT_HALF, 0], dtype=complex),
    '00': np.array([1, 0, 0, 0], dtype=complex),
}


def _complex(value, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ValidationError(f"{path}: expected a number or [re, im] pair, got {value!r}")


def parse_vector(data, path: str = "vector") -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{path}: expected a non-empty list")
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(data)], dtype=complex)


def parse_matrix(data, path: str = "matrix") -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(row, list) for row in data):
        raise ValidationError(f"{path}: expected a list of rows")
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise ValidationError(f"{path}: rows have different lengths")
    return np.array([[_complex(v, f"{path}[{r}][{c}]") for c, v in enumerate(row)]
                     for r, row in enumerate(data)], dtype=complex)


def _require(data: Dict, key: str, path: str):
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected an object")
    if key not in data:
        raise ValidationError(f"{path}.{key}: missing")
    return data[key]


def _integer(data: Dict, key: str, path: str, default: int = None) -> int:
    if default is not None and isinstance(data, dict) and key not in data:
        return default
    value = _require(data, key, path)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{path}.{key}: expected an integer, got {value!r}")
    return value


def _number(data: Dict, key: str, path: str) -> float:
    value = _require(data, key, path)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


def parse_operator(data, path: str = "operator") -> np.ndarray:
    """Gate name, Pauli string or explicit matrix."""
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected an object")
    if 'gate' in data:
        name = str(data['gate']).upper()
        if name in GATES:
            return np.array(GATES[name])
        if name in ROTATIONS:
            return ROTATIONS[name](_number(data, 'theta', path))
        raise ValidationError(f"{path}.gate: unknown gate '{data['gate']}'")
    if 'pauli' in data:
        return pauli_string(str(data['pauli']))
    if 'matrix' in data:
        return parse_matrix(data['matrix'], f"{path}.matrix")
    raise ValidationError(f"{path}: expected one of 'gate', 'pauli', 'matrix'")


def parse_channel(data, dim: int, path: str = "channel") -> Channel:
    """Channel reference acting on a ``dim``-level subsystem."""
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected an object")
    try:
        if 'channel' in data:
            name = data['channel']
            if name == 'identity':
                return identity_channel(dim)
            if name == 'dephasing':
                p = _number(data, 'p', path)
                return dephasing(p) if dim == 2 else qudit_dephasing(p, dim)
            if name == 'qudit_dephasing':
                return qudit_dephasing(_number(data, 'p', path), dim)
            if name == 'depolarizing':
                return depolarizing(_number(data, 'p', path), dim)
            if name == 'amplitude_damping':
                return amplitude_damping(_number(data, 'gamma', path))
            raise ValidationError(f"{path}.channel: unknown channel '{name}'")
        if 'kraus' in data:
            ops = data['kraus']
            if not isinstance(ops, list) or not ops:
                raise ValidationError(f"{path}.kraus: expected a non-empty list of matrices")
            return Channel(tuple(parse_matrix(k, f"{path}.kraus[{i}]") for i, k in enumerate(ops)),
                           name=str(data.get('name', 'kraus')))
        op = parse_operator(data, path)
        label = data.get('gate') or data.get('pauli') or 'unitary'
        return unitary_channel(op, name=str(label))
    except ValidationError as e:
        if str(e).startswith(path):
            raise
        raise ValidationError(f"{path}: {e}")


def parse_state(data, radix: int, path: str = "state") -> QuantumState:
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected an object")
    try:
        if 'basis' in data:
            index = _integer(data, 'basis', path)
            if not 0 <= index < radix:
                raise ValidationError(f"{path}.basis: index {index} outside 0..{radix - 1}")
            return QuantumState.basis([radix], index)
        if 'vector' in data:
            return QuantumState.from_vector(parse_vector(data['vector'], f"{path}.vector"), [radix])
        if 'density' in data:
            return QuantumState.from_density(parse_matrix(data['density'], f"{path}.density"), [radix])
        if data.get('maximally_mixed'):
            return QuantumState.maximally_mixed([radix])
    except ValidationError as e:
        if str(e).startswith(path):
            raise
        raise ValidationError(f"{path}: {e}")
    raise ValidationError(f"{path}: expected one of 'basis', 'vector', 'density', 'maximally_mixed'")


class SpecLoader:
    """Build ForkSpec values from parsed JSON documents."""

    def load(self, path: str) -> ForkSpec:
        """Read and parse a ForkSpec JSON file.

        Args:
            path: Path to the JSON file

        Returns:
            The validated ForkSpec
        """
        spec_file = Path(path)
        if not spec_file.exists():
            raise FileNotFoundError(f"Spec file not found: {path}")
        try:
            with open(spec_file, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON ({e})")
        logger.debug(f"Loaded spec file {path}")
        return self.parse(data)

    def parse(self, data: Dict) -> ForkSpec:
        d = _integer(data, 'd', 'spec')
        q = _integer(data, 'q', 'spec')
        radix = _integer(data, 'slot_radix', 'spec', default=2)
        control = self._parse_control(_require(data, 'control', 'spec'), d)
        target = parse_state(_require(data, 'target_state', 'spec'), radix, 'target_state')

        ancilla_data = data.get('ancilla_states')
        if ancilla_data is None:
            ancillas = [QuantumState.basis([radix], 0) for _ in range(q * (d - 1))]
        else:
            if not isinstance(ancilla_data, list):
                raise ValidationError("ancilla_states: expected a list")
            ancillas = [parse_state(a, radix, f"ancilla_states[{i}]") for i, a in enumerate(ancilla_data)]

        pipelines = self._parse_pipelines(data.get('pipelines'), d, q, radix)
        control_pipeline = [parse_channel(c, control.control_dim, f"control_pipeline[{i}]")
                            for i, c in enumerate(data.get('control_pipeline', []))]
        measurement = self._parse_measurement(_require(data, 'measurement', 'spec'), q)
        return ForkSpec(d=d, q=q, control=control, slot_radix=radix, target_state=target,
                        ancilla_states=tuple(ancillas), slot_pipelines=pipelines,
                        measurement=measurement, control_pipeline=tuple(control_pipeline))

    def _parse_control(self, data: Dict, d: int) -> ControlSpec:
        kind = _require(data, 'type', 'control')
        if kind == 'uniform':
            return ControlSpec.uniform(d)
        if kind in ('pure', 'mixed'):
            weights = _require(data, 'weights', 'control')
            if not isinstance(weights, list):
                raise ValidationError("control.weights: expected a list")
            if kind == 'mixed':
                return ControlSpec.mixed(weights)
            return ControlSpec.pure(weights, data.get('phases'))
        if kind == 'encoded':
            prep = _require(data, 'prep', 'control')
            if isinstance(prep, list) and prep and isinstance(prep[0], dict):
                unitary = kron_all([parse_operator(g, f"control.prep[{i}]") for i, g in enumerate(prep)])
            else:
                unitary = parse_matrix(prep, 'control.prep')
            return ControlSpec.encoded(unitary, _require(data, 'branch_sets', 'control'))
        raise ValidationError(f"control.type: unknown control type '{kind}'")

    def _parse_pipelines(self, data, d: int, q: int, radix: int):
        if data is None:
            return empty_pipelines(d, q)
        if not isinstance(data, list) or len(data) != q:
            raise ValidationError(f"pipelines: expected {q} copy lists")
        pipelines = []
        for k, copy in enumerate(data):
            if not isinstance(copy, list) or len(copy) != d:
                raise ValidationError(f"pipelines[{k}]: expected {d} slot lists")
            pipelines.append(tuple(
                tuple(parse_channel(c, radix, f"pipelines[{k}][{s}][{n}]") for n, c in enumerate(slot))
                for s, slot in enumerate(copy)))
        return tuple(pipelines)

    def _parse_measurement(self, data: Dict, q: int):
        kind = data.get('type', 'expectation') if isinstance(data, dict) else None
        if kind == 'expectation':
            if 'observables' in data:
                factors = [parse_operator(o, f"measurement.observables[{i}]")
                           for i, o in enumerate(data['observables'])]
                if len(factors) != q:
                    raise ValidationError(f"measurement.observables: expected {q} entries")
            else:
                factors = [parse_operator(_require(data, 'observable', 'measurement'), 'measurement.observable')] * q
            return ExpectationMeasurement(kron_all(factors))
        if kind == 'projective':
            projectors = _require(data, 'projectors', 'measurement')
            return ProjectiveMeasurement(tuple(parse_operator(p, f"measurement.projectors[{i}]")
                                               for i, p in enumerate(projectors)))
        raise ValidationError(f"measurement.type: unknown measurement '{kind}'")


def load_spec(path: str) -> ForkSpec:
    return SpecLoader().load(path)


def two_qubit_state(name: str, seed: int = None) -> QuantumState:
    """Named two-qubit input: phi+, phi-, psi+, psi-, 00, random or random-mixed."""
    key = name.lower()
    if key in NAMED_TWO_QUBIT_STATES:
        return QuantumState.from_vector(NAMED_TWO_QUBIT_STATES[key])
    if key == 'random':
        return random_pure_state(4, seed)
    if key == 'random-mixed':
        return random_density(4, seed)
    raise ValidationError(f"Unknown state '{name}'; expected one of "
                          f"{', '.join(list(NAMED_TWO_QUBIT_STATES) + ['random', 'random-mixed'])}")


def single_qubit_state(name: str, seed: int = None) -> QuantumState:
    """Named qubit input: 0, 1, +, -, +i, -i, mixed or random."""
    vectors = {
        '0': [1, 0], '1': [0, 1],
        '+': [_SQRT_HALF, _SQRT_HALF], '-': [_SQRT_HALF, -_SQRT_HALF],
        '+i': [_SQRT_HALF, 1j * _SQRT_HALF], '-i': [_SQRT_HALF, -1j * _SQRT_HALF],
    }
    key = name.lower()
    if key in vectors:
        return QuantumState.from_vector(np.array(vectors[key], dtype=complex))
    if key == 'mixed':
        return QuantumState.maximally_mixed([2])
    if key == 'random':
        return random_density(2, seed)
    raise ValidationError(f"Unknown state '{name}'; expected one of {', '.join(list(vectors) + ['mixed', 'random'])}")


def channel_from_name(name: str, param: float = 0.0, dim: int = 2) -> Channel:
    """CLI shorthand: identity, dephasing, depolarizing, amplitude_damping."""
    keys = {'identity': None, 'dephasing': 'p', 'depolarizing': 'p', 'amplitude_damping': 'gamma'}
    if name not in keys:
        raise ValidationError(f"Unknown channel '{name}'; expected one of {', '.join(keys)}")
    data = {'channel': name}
    if keys[name]:
        data[keys[name]] = float(param)
    return parse_channel(data, dim, name)
