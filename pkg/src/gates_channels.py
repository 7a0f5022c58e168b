"""Gate constants and Kraus-operator channels.

Channel parameter conventions (each with its closed-form action):

* ``dephasing(p)``: rho -> (1 - p) rho + p diag(rho); qubit Bloch vector
  (x, y, z) -> ((1 - p) x, (1 - p) y, z).
* ``depolarizing(p)``: rho -> (1 - p) rho + p tr(rho) I / D; Bloch vector
  shrinks by (1 - p).
* ``amplitude_damping(gamma)``: Kraus [[1, 0], [0, sqrt(1 - gamma)]] and
  [[0, sqrt(gamma)], [0, 0]]; (x, y, z) -> (sqrt(1 - g) x, sqrt(1 - g) y,
  g + (1 - g) z).

Rotations follow R_a(theta) = exp(-i theta sigma_a / 2).
"""

import logging
from dataclasses import dataclass, field
from math import cos, sin, sqrt
from typing import Sequence, Tuple

import numpy as np

from src.errors import ValidationError
from src.tensor_core import ATOL_ORACLE, as_matrix, is_unitary, scale

logger = logging.getLogger(__name__)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
SDG = np.array([[1, 0], [0, -1j]], dtype=complex)

PAULIS = {'I': I2, 'X': X, 'Y': Y, 'Z': Z}

for _gate in (I2, X, Y, Z, H, S, SDG):
    _gate.setflags(write=False)


def rx(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def rotation(axis: str, theta: float) -> np.ndarray:
    """Rotation about ``axis`` ('x', 'y' or 'z', case-insensitive)."""
    builders = {'x': rx, 'y': ry, 'z': rz}
    try:
        return builders[axis.lower()](theta)
    except KeyError:
        raise ValidationError(f"Unknown rotation axis: {axis}")


def swap(radix: int = 2) -> np.ndarray:
    """SWAP of two subsystems of equal radix."""
    dim = radix * radix
    out = np.zeros((dim, dim), dtype=complex)
    for a in range(radix):
        for b in range(radix):
            out[b * radix + a, a * radix + b] = 1
    return out


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of Paulis, e.g. ``'XZ'`` -> X (x) Z."""
    out = np.ones((1, 1), dtype=complex)
    for char in label.upper():
        if char not in PAULIS:
            raise ValidationError(f"Unknown Pauli label '{char}' in '{label}'")
        out = np.kron(out, PAULIS[char])
    return out


def weyl_operators(dim: int):
    """Clock-and-shift operators X^a Z^b for a, b in 0..dim-1."""
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    clock = np.diag([omega ** j for j in range(dim)])
    ops = []
    for a in range(dim):
        for b in range(dim):
            ops.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return ops


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive trace-preserving map in Kraus form."""
    kraus_ops: Tuple[np.ndarray, ...]
    name: str = "channel"
    params: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        ops = tuple(as_matrix(k).copy() for k in self.kraus_ops)
        if not ops:
            raise ValidationError("A channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ValidationError(f"Kraus operators must share one square shape, got {k.shape} and {(dim, dim)}")
        completeness = sum(k.conj().T @ k for k in ops)
        if not np.allclose(completeness, np.eye(dim), atol=ATOL_ORACLE, rtol=0):
            deviation = np.max(np.abs(completeness - np.eye(dim)))
            raise ValidationError(f"Channel '{self.name}' is not trace preserving (max deviation {deviation:.3e})")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, 'kraus_ops', ops)
        object.__setattr__(self, 'params', tuple(float(p) for p in self.params))

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def channel_id(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}(" + ",".join(f"{p:.6g}" for p in self.params) + ")"

    @property
    def is_unitary(self) -> bool:
        return len(self.kraus_ops) == 1 and is_unitary(self.kraus_ops[0])

    def apply(self, rho) -> np.ndarray:
        """Apply the channel to a density matrix of matching dimension."""
        rho = as_matrix(rho)
        if rho.shape != (self.dim, self.dim):
            raise ValidationError(f"Channel '{self.name}' acts on dim {self.dim}, got matrix {rho.shape}")
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def __repr__(self):
        return f"Channel({self.channel_id}, dim={self.dim}, kraus={len(self.kraus_ops)})"


def _check_probability(value: float, label: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValidationError(f"{label} must lie in [0, 1], got {value}")
    return value


def unitary_channel(u, name: str = "unitary") -> Channel:
    u = as_matrix(u)
    if not is_unitary(u):
        raise ValidationError(f"'{name}' is not unitary")
    return Channel((u,), name=name)


def identity_channel(dim: int = 2) -> Channel:
    return Channel((np.eye(dim, dtype=complex),), name="identity")


def dephasing(p: float) -> Channel:
    """Qubit dephasing with Kraus operators sqrt(1 - p/2) I and sqrt(p/2) Z.

    Off-diagonal entries shrink by (1 - p); p = 1 removes them entirely.

    Args:
        p: Dephasing strength in [0, 1]

    Returns:
        The dephasing Channel
    """
    p = _check_probability(p, "Dephasing strength")
    return Channel((sqrt(1 - p / 2) * I2, sqrt(p / 2) * Z), name="dephasing", params=(p,))


def qudit_dephasing(p: float, dim: int) -> Channel:
    """rho -> (1 - p) rho + p diag(rho) on a ``dim``-level system."""
    p = _check_probability(p, "Dephasing strength")
    ops = [sqrt(1 - p) * np.eye(dim, dtype=complex)]
    for j in range(dim):
        proj = np.zeros((dim, dim), dtype=complex)
        proj[j, j] = 1
        ops.append(sqrt(p) * proj)
    return Channel(tuple(ops), name="qudit_dephasing", params=(p,))


def depolarizing(p: float, dim: int = 2) -> Channel:
    """rho -> (1 - p) rho + p I/dim, built from Paulis (dim 2) or Weyl operators.

    Args:
        p: Depolarizing strength in [0, 1]
        dim: Level count of the system

    Returns:
        The depolarizing Channel
    """
    p = _check_probability(p, "Depolarizing strength")
    if dim == 2:
        ops = (sqrt(1 - 3 * p / 4) * I2, sqrt(p / 4) * X, sqrt(p / 4) * Y, sqrt(p / 4) * Z)
        return Channel(ops, name="depolarizing", params=(p,))
    weyl = weyl_operators(dim)
    n = dim * dim
    ops = [sqrt(1 - p + p / n) * weyl[0]] + [sqrt(p / n) * w for w in weyl[1:]]
    return Channel(tuple(ops), name="depolarizing", params=(p,))


def amplitude_damping(gamma: float) -> Channel:
    """Decay |1> -> |0> with probability ``gamma``."""
    gamma = _check_probability(gamma, "Damping rate")
    k0 = np.array([[1, 0], [0, sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, sqrt(gamma)], [0, 0]], dtype=complex)
    return Channel((k0, k1), name="amplitude_damping", params=(gamma,))


def check_weights(weights: Sequence[float], atol: float = 1e-12) -> Tuple[float, ...]:
    """Validate a probability vector and return it as a tuple."""
    weights = tuple(float(w) for w in weights)
    if not weights:
        raise ValidationError("Weights must be non-empty")
    if any(w < 0 for w in weights):
        raise ValidationError(f"Weights must be non-negative, got {weights}")
    if abs(sum(weights) - 1.0) > atol:
        raise ValidationError(f"Weights must sum to 1, got {sum(weights)!r}")
    return weights


def mixed_unitary(weights: Sequence[float], unitaries: Sequence) -> Channel:
    """rho -> sum_i p_i U_i rho U_i^dagger.

    Args:
        weights: Probability vector p_i
        unitaries: One unitary per weight, all of one dimension

    Returns:
        Channel with Kraus operators sqrt(p_i) U_i

    Raises:
        ValidationError: Weights are not a distribution or a matrix is not unitary
    """
    weights = check_weights(weights)
    if len(weights) != len(unitaries):
        raise ValidationError(f"{len(weights)} weights for {len(unitaries)} unitaries")
    mats = [as_matrix(u) for u in unitaries]
    dim = mats[0].shape[0]
    for u in mats:
        if u.shape != (dim, dim) or not is_unitary(u):
            raise ValidationError("mixed_unitary needs unitaries of one common dimension")
    return Channel(tuple(scale(u, sqrt(w)) for w, u in zip(weights, mats)), name="mixed_unitary")


def compose(a: Channel, b: Channel) -> Channel:
    """Channel that applies ``a`` first and then ``b``."""
    if a.dim != b.dim:
        raise ValidationError(f"Cannot compose channels of dims {a.dim} and {b.dim}")
    ops = tuple(kb @ ka for kb in b.kraus_ops for ka in a.kraus_ops)
    return Channel(ops, name=f"{b.channel_id}*{a.channel_id}")


def compose_all(channels: Sequence[Channel]) -> Channel:
    """Temporal composition of a non-empty list, first element applied first."""
    if not channels:
        raise ValidationError("compose_all needs at least one channel")
    result = channels[0]
    for ch in channels[1:]:
        result = compose(result, ch)
    return result


def conjugated(inner: Channel, u) -> Channel:
    """U^dagger . inner(U rho U^dagger) . U as one channel."""
    u = as_matrix(u)
    return compose_all([unitary_channel(u), inner, unitary_channel(u.conj().T)])
