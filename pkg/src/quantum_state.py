"""Register layouts and quantum states over them.

A ``QuantumState`` stores either an amplitude vector or a density matrix.
Every operation returns a new state; arrays inside a state are read-only.
Local operators are contracted onto the register tensor axis by axis
(``tensor_core.apply_to_axes``) rather than by building full-space matrices;
``embed`` builds the full matrix when one is explicitly wanted.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import ValidationError
from src.gates_channels import Channel
from src.tensor_core import (
    ATOL_ORACLE,
    ATOL_STRUCTURAL,
    apply_to_axes,
    as_matrix,
    as_vector,
    check_density_dim,
    check_pure_dim,
    hermitian_eig,
    is_hermitian,
    is_unitary,
    partial_trace,
)

logger = logging.getLogger(__name__)

# Probabilities this far outside [0, 1] are treated as roundoff and clipped.
PROBABILITY_CLIP = 1e-9


class Role(Enum):
    CONTROL = "control"
    TARGET = "target"
    ANCILLA = "ancilla"
    SYSTEM = "system"


@dataclass(frozen=True)
class Subsystem:
    """One tensor factor of a register.

    ``copy`` and ``slot`` locate target and ancilla slots of a forking
    register; slot 0 of each copy holds the target, slots 1..d-1 the ancillae.
    """

    radix: int
    role: Role = Role.SYSTEM
    copy: Optional[int] = None
    slot: Optional[int] = None

    def to_dict(self) -> dict:
        out = {'radix': self.radix, 'role': self.role.value}
        if self.copy is not None:
            out['copy'] = self.copy
        if self.slot is not None:
            out['slot'] = self.slot
        return out


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered mixed-radix subsystem list."""

    subsystems: Tuple[Subsystem, ...]
    block_size: int = 1

    def __post_init__(self):
        subsystems = tuple(self.subsystems)
        if not subsystems:
            raise ValidationError("A register needs at least one subsystem")
        for sub in subsystems:
            if sub.radix < 2:
                raise ValidationError(f"Subsystem radix must be >= 2, got {sub.radix}")
        object.__setattr__(self, 'subsystems', subsystems)

    @classmethod
    def from_radices(cls, radices: Sequence[int]) -> 'RegisterLayout':
        return cls(tuple(Subsystem(int(r)) for r in radices))

    @classmethod
    def single(cls, radix: int) -> 'RegisterLayout':
        return cls((Subsystem(int(radix)),))

    @classmethod
    def qfs(cls, d: int, q: int, control_dim: int, slot_radix: int) -> 'RegisterLayout':
        """Control first, then per copy its target slot and d-1 ancilla slots."""
        subsystems = [Subsystem(control_dim, Role.CONTROL)]
        for k in range(q):
            subsystems.append(Subsystem(slot_radix, Role.TARGET, copy=k, slot=0))
            for s in range(1, d):
                subsystems.append(Subsystem(slot_radix, Role.ANCILLA, copy=k, slot=s))
        block = int(round(np.log2(slot_radix))) if (slot_radix & (slot_radix - 1)) == 0 else 1
        return cls(tuple(subsystems), block_size=block)

    @property
    def radices(self) -> List[int]:
        return [s.radix for s in self.subsystems]

    @property
    def dim(self) -> int:
        return int(np.prod(self.radices))

    def __len__(self):
        return len(self.subsystems)

    def slot_index(self, copy: int, slot: int) -> int:
        """Subsystem index of a target/ancilla slot."""
        for i, sub in enumerate(self.subsystems):
            if sub.copy == copy and sub.slot == slot:
                return i
        raise ValidationError(f"No slot {slot} in copy {copy}")

    def target_indices(self) -> List[int]:
        return [i for i, s in enumerate(self.subsystems) if s.role == Role.TARGET]

    def to_dict(self) -> dict:
        return {
            'radices': self.radices,
            'block_size': self.block_size,
            'subsystems': [s.to_dict() for s in self.subsystems],
        }

    def check_targets(self, targets: Sequence[int]) -> List[int]:
        targets = [int(t) for t in targets]
        if len(set(targets)) != len(targets):
            raise ValidationError(f"Repeated target in {targets}")
        for t in targets:
            if t < 0 or t >= len(self.subsystems):
                raise ValidationError(f"Target {t} out of range for {len(self.subsystems)} subsystems")
        return targets

    def target_dim(self, targets: Sequence[int]) -> int:
        return int(np.prod([self.subsystems[t].radix for t in targets]))


LayoutLike = Union[RegisterLayout, Sequence[int]]


def _as_layout(layout: LayoutLike) -> RegisterLayout:
    if isinstance(layout, RegisterLayout):
        return layout
    return RegisterLayout.from_radices(layout)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure amplitude vector or density matrix over a register layout."""

    layout: RegisterLayout
    data: np.ndarray
    is_pure: bool

    def __post_init__(self):
        dim = self.layout.dim
        if self.is_pure:
            vec = as_vector(self.data)
            if vec.size != dim:
                raise ValidationError(f"Amplitude vector of length {vec.size} for a register of dim {dim}")
            check_pure_dim(dim)
            norm = np.linalg.norm(vec)
            if abs(norm - 1.0) > ATOL_STRUCTURAL:
                raise ValidationError(f"State vector is not normalized (norm {norm:.12g})")
            object.__setattr__(self, 'data', _frozen(vec))
        else:
            rho = as_matrix(self.data)
            if rho.shape != (dim, dim):
                raise ValidationError(f"Density matrix of shape {rho.shape} for a register of dim {dim}")
            check_density_dim(dim)
            if not is_hermitian(rho):
                raise ValidationError("Density matrix is not Hermitian")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > ATOL_STRUCTURAL:
                raise ValidationError(f"Density matrix trace is {tr:.12g}, expected 1")
            min_eig = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
            if min_eig < -ATOL_STRUCTURAL:
                raise ValidationError(f"Density matrix has negative eigenvalue {min_eig:.3e}")
            object.__setattr__(self, 'data', _frozen(rho))

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_vector(cls, vector, layout: LayoutLike = None) -> 'QuantumState':
        vec = as_vector(vector)
        layout = RegisterLayout.single(vec.size) if layout is None else _as_layout(layout)
        return cls(layout, vec, True)

    @classmethod
    def from_density(cls, rho, layout: LayoutLike = None) -> 'QuantumState':
        rho = as_matrix(rho)
        layout = RegisterLayout.single(rho.shape[0]) if layout is None else _as_layout(layout)
        return cls(layout, rho, False)

    @classmethod
    def coerce(cls, value, radix: int = None) -> 'QuantumState':
        """Accept a state, an amplitude vector or a density matrix."""
        if isinstance(value, QuantumState):
            return value
        arr = np.asarray(value, dtype=complex)
        if arr.ndim == 1:
            return cls.from_vector(arr, None if radix is None else [radix])
        return cls.from_density(arr, None if radix is None else [radix])

    @classmethod
    def basis(cls, layout: LayoutLike, index: int = 0) -> 'QuantumState':
        layout = _as_layout(layout)
        vec = np.zeros(layout.dim, dtype=complex)
        vec[index] = 1
        return cls(layout, vec, True)

    @classmethod
    def maximally_mixed(cls, layout: LayoutLike) -> 'QuantumState':
        layout = _as_layout(layout)
        return cls(layout, np.eye(layout.dim, dtype=complex) / layout.dim, False)

    # -- views ---------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.layout.dim

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_density(self) -> 'QuantumState':
        if not self.is_pure:
            return self
        logger.debug(f"Promoting pure state of dim {self.dim} to density form")
        return QuantumState(self.layout, self.density_matrix(), False)

    def with_layout(self, layout: RegisterLayout) -> 'QuantumState':
        return QuantumState(layout, self.data, self.is_pure)

    def tensor(self) -> np.ndarray:
        """Register tensor: radices for pure states, radices + radices for densities."""
        radices = self.layout.radices
        shape = radices if self.is_pure else radices + radices
        return np.array(self.data).reshape(shape)

    @classmethod
    def from_tensor(cls, layout: RegisterLayout, tensor: np.ndarray, is_pure: bool) -> 'QuantumState':
        dim = layout.dim
        data = tensor.reshape(dim) if is_pure else tensor.reshape(dim, dim)
        return cls(layout, data, is_pure)

    def fidelity_with_pure(self, other: 'QuantumState') -> float:
        """|<a|b>|^2 for two pure states; equality up to global phase."""
        if not (self.is_pure and other.is_pure):
            raise ValidationError("fidelity_with_pure needs two pure states")
        return float(abs(np.vdot(self.data, other.data)) ** 2)


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    acting_on: Tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise ValidationError("Observable is not Hermitian")
        object.__setattr__(self, 'matrix', _frozen(m))
        object.__setattr__(self, 'acting_on', tuple(int(t) for t in self.acting_on))


@dataclass(frozen=True, eq=False)
class Projector:
    matrix: np.ndarray
    acting_on: Tuple[int, ...]

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m):
            raise ValidationError("Projector is not Hermitian")
        if not np.allclose(m @ m, m, atol=ATOL_ORACLE, rtol=0):
            raise ValidationError("Projector is not idempotent")
        object.__setattr__(self, 'matrix', _frozen(m))
        object.__setattr__(self, 'acting_on', tuple(int(t) for t in self.acting_on))


def _check_operator(layout: RegisterLayout, op: np.ndarray, targets: Sequence[int]) -> List[int]:
    targets = layout.check_targets(targets)
    expected = layout.target_dim(targets)
    if op.shape != (expected, expected):
        raise ValidationError(f"Operator of shape {op.shape} on targets {targets} (dim {expected})")
    return targets


def embed(op, layout: LayoutLike, targets: Sequence[int]) -> np.ndarray:
    """Full-space matrix acting as ``op`` on ``targets`` (in order), identity elsewhere."""
    layout = _as_layout(layout)
    op = as_matrix(op)
    targets = _check_operator(layout, op, targets)
    check_density_dim(layout.dim)
    radices = layout.radices
    identity = np.eye(layout.dim, dtype=complex).reshape(radices + radices)
    return apply_to_axes(identity, op, targets).reshape(layout.dim, layout.dim)


def apply_operator(state: QuantumState, op, targets: Sequence[int]) -> QuantumState:
    """Conjugate by (or act with) an arbitrary local operator without validation of unitarity."""
    op = as_matrix(op)
    targets = _check_operator(state.layout, op, targets)
    tensor = state.tensor()
    n = len(state.layout)
    tensor = apply_to_axes(tensor, op, targets)
    if not state.is_pure:
        tensor = apply_to_axes(tensor, op, [n + t for t in targets], conjugate=True)
    return QuantumState.from_tensor(state.layout, tensor, state.is_pure)


def apply_unitary(state: QuantumState, u, targets: Sequence[int]) -> QuantumState:
    """Apply ``u`` to the listed subsystems, staying pure when the input is pure.

    Args:
        state: Register state
        u: Unitary acting on the targets in listed order
        targets: Subsystem indices

    Returns:
        The transformed state

    Raises:
        ValidationError: ``u`` is not unitary or its size does not match the targets
    """
    u = as_matrix(u)
    if not is_unitary(u):
        raise ValidationError("apply_unitary received a non-unitary matrix")
    return apply_operator(state, u, targets)


def apply_channel(state: QuantumState, channel: Channel, targets: Sequence[int]) -> QuantumState:
    """rho -> sum_k K_k rho K_k^dagger on the targets; pure inputs are promoted."""
    if not isinstance(channel, Channel):
        raise ValidationError(f"apply_channel expects a Channel, got {type(channel).__name__}")
    targets = _check_operator(state.layout, channel.kraus_ops[0], targets)
    state = state.to_density()
    n = len(state.layout)
    tensor = state.tensor()
    col_axes = [n + t for t in targets]
    out = np.zeros_like(tensor)
    for k in channel.kraus_ops:
        out += apply_to_axes(apply_to_axes(tensor, k, targets), k, col_axes, conjugate=True)
    return QuantumState.from_tensor(state.layout, out, False)


def reduced_density(state: QuantumState, targets: Sequence[int]) -> np.ndarray:
    """Density matrix of ``targets``, factors ordered as listed."""
    targets = state.layout.check_targets(targets)
    radices = state.layout.radices
    n = len(radices)
    dim_t = state.layout.target_dim(targets)
    if state.is_pure:
        rest = [i for i in range(n) if i not in targets]
        psi = np.transpose(state.tensor(), targets + rest).reshape(dim_t, -1)
        return psi @ psi.conj().T
    reduced = partial_trace(state.data, radices, targets)
    kept = sorted(targets)
    order = [kept.index(t) for t in targets]
    k = len(kept)
    tensor = reduced.reshape([radices[t] for t in kept] * 2)
    tensor = np.transpose(tensor, order + [k + o for o in order])
    return tensor.reshape(dim_t, dim_t)


def expectation(state: QuantumState, obs: Observable) -> float:
    """Real part of tr(M rho) on the observable's subsystems.

    An imaginary part above tolerance is logged and dropped.
    """
    rho = reduced_density(state, obs.acting_on)
    _check_operator(state.layout, obs.matrix, obs.acting_on)
    value = np.trace(obs.matrix @ rho)
    if abs(value.imag) > ATOL_ORACLE:
        logger.warning(f"Expectation has imaginary part {value.imag:.3e}; discarding it")
    return float(value.real)


def _clip_probability(p: float) -> float:
    if p < -PROBABILITY_CLIP or p > 1 + PROBABILITY_CLIP:
        raise ValidationError(f"Probability {p!r} lies outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def projective_probability(state: QuantumState, proj: Projector) -> float:
    """tr(P rho), clipped into [0, 1] when roundoff pushes it just outside."""
    rho = reduced_density(state, proj.acting_on)
    _check_operator(state.layout, proj.matrix, proj.acting_on)
    return _clip_probability(float(np.trace(proj.matrix @ rho).real))


def outcome_distribution(state: QuantumState, obs: Observable, atol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct eigenvalues of ``obs`` and their Born probabilities.

    Eigenvalues closer than ``atol`` are merged into one outcome.
    """
    rho = reduced_density(state, obs.acting_on)
    values, vectors = hermitian_eig(obs.matrix)
    populations = np.real(np.einsum('ij,jk,ki->i', vectors.conj().T, rho, vectors))

    outcomes, probs = [], []
    for value, pop in zip(values, populations):
        if outcomes and abs(value - outcomes[-1]) <= atol:
            probs[-1] += pop
        else:
            outcomes.append(float(value))
            probs.append(float(pop))
    probs = np.array([_clip_probability(p) for p in probs])
    total = probs.sum()
    if abs(total - 1.0) > ATOL_ORACLE:
        raise ValidationError(f"Outcome probabilities sum to {total!r}")
    return np.array(outcomes), probs / total


def born_sample(state: QuantumState, obs: Observable, shots: int, seed) -> np.ndarray:
    """i.i.d. eigenvalue outcomes of measuring ``obs``; reproducible for a fixed seed."""
    if int(shots) < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    outcomes, probs = outcome_distribution(state, obs)
    rng = np.random.default_rng(seed)
    return rng.choice(outcomes, size=int(shots), p=probs)


def product_state(states: Iterable[QuantumState], layout: RegisterLayout) -> QuantumState:
    """Tensor product of single-factor states over ``layout``.

    The result is pure only when every factor is pure.
    """
    states = list(states)
    if len(states) != len(layout):
        raise ValidationError(f"{len(states)} factors for a layout of {len(layout)} subsystems")
    for sub, st in zip(layout.subsystems, states):
        if st.dim != sub.radix:
            raise ValidationError(f"Factor of dim {st.dim} placed on a radix-{sub.radix} subsystem")
    if all(st.is_pure for st in states):
        check_pure_dim(layout.dim)
        vec = np.ones(1, dtype=complex)
        for st in states:
            vec = np.kron(vec, st.data)
        return QuantumState(layout, vec, True)
    check_density_dim(layout.dim)
    rho = np.ones((1, 1), dtype=complex)
    for st in states:
        rho = np.kron(rho, st.density_matrix())
    return QuantumState(layout, rho, False)
