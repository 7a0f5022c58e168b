"""Ready-made forking circuits for the standard applications.

Each ``*_spec`` builder returns a ForkSpec; the matching function runs it and
post-processes the measured value.
"""

import logging
from dataclasses import dataclass, asdict
from math import acos, cos, sin, sqrt
from typing import List, Sequence, Union

import numpy as np

from src.errors import ValidationError
from src.forking_engine import (
    ControlSpec,
    ExpectationMeasurement,
    ForkSpec,
    ProjectiveMeasurement,
    run,
)
from src.gates_channels import (
    H,
    I2,
    S,
    SDG,
    Z,
    Channel,
    conjugated,
    rotation,
    ry,
    unitary_channel,
)
from src.quantum_state import QuantumState
from src.tensor_core import ATOL_ORACLE, as_matrix, kron_all

logger = logging.getLogger(__name__)

# R_y angle that splits a qubit 2:1, giving three equal-weight branches on two qubits
ENCODED_CONTROL_THETA = 2 * acos(sqrt(2 / 3))

AXES = ('x', 'y', 'z')


@dataclass(frozen=True)
class WitnessReport:
    """Teleportation-witness estimate.

    ``witness_value = (1 - 3 * qfs_measured) / 4`` because the equal-weight
    circuit measures (<XX> - <YY> + <ZZ>) / 3 and
    W_t = (II - XX + YY - ZZ) / 4. ``entangled_flag`` requires
    ``witness_value < -1e-9`` so roundoff around zero never flags a
    separable state.
    """

    qfs_measured: float
    witness_value: float
    entangled_flag: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PurityReport:
    qfs_measured: float
    purity_sum: float
    trace_purity: float

    def to_dict(self) -> dict:
        return asdict(self)


def _as_channel(ch, name: str = "unitary") -> Channel:
    if isinstance(ch, Channel):
        return ch
    return unitary_channel(ch, name=name)


def copy_observables(obs, q: int) -> List[np.ndarray]:
    """One observable per copy: a single matrix is repeated q times."""
    if isinstance(obs, np.ndarray) and obs.ndim == 2:
        return [obs] * q
    mats = [as_matrix(m) for m in obs]
    if len(mats) != q:
        raise ValidationError(f"Need {q} per-copy observables, got {len(mats)}")
    return mats


def _control(weights: Sequence[float], control: Union[str, ControlSpec]) -> ControlSpec:
    if isinstance(control, ControlSpec):
        return control
    if control == 'pure':
        return ControlSpec.pure(weights)
    if control == 'mixed':
        return ControlSpec.mixed(weights)
    raise ValidationError(f"Unknown control form: {control}")


def _default_ancillas(count: int, radix: int) -> List[QuantumState]:
    return [QuantumState.basis([radix], 0) for _ in range(count)]


def power_sum_spec(d: int, q: int, weights: Sequence[float], channels: Sequence, obs, rho_psi,
                   ancilla_states: Sequence = None, control: Union[str, ControlSpec] = 'pure',
                   projective: bool = False) -> ForkSpec:
    """Canonical circuit for sum_i p_i prod_j <M_j>_{Lambda_i(rho)}.

    Branch i's channel runs on slot i-1 of every copy. With ``projective``
    the observables are read as per-copy projectors instead.
    """
    if len(channels) != d:
        raise ValidationError(f"Need {d} branch channels, got {len(channels)}")
    channels = [_as_channel(ch) for ch in channels]
    radix = channels[0].dim
    target = QuantumState.coerce(rho_psi, radix)
    pipelines = tuple(tuple((ch,) for ch in channels) for _ in range(q))
    if ancilla_states is None:
        ancilla_states = _default_ancillas(q * (d - 1), radix)
    mats = copy_observables(obs, q)
    measurement = ProjectiveMeasurement(tuple(mats)) if projective else ExpectationMeasurement(kron_all(mats))
    return ForkSpec(d=d, q=q, control=_control(weights, control), slot_radix=radix,
                    target_state=target, ancilla_states=tuple(ancilla_states),
                    slot_pipelines=pipelines, measurement=measurement)


def weighted_power_sum(d: int, q: int, weights: Sequence[float], channels: Sequence, obs, rho_psi,
                       **options) -> float:
    """Evaluate sum_i p_i prod_j <M_j> over d trajectories with one forking circuit."""
    spec = power_sum_spec(d, q, weights, channels, obs, rho_psi, **options)
    value = run(spec).value
    logger.info(f"Weighted power sum (d={d}, q={q}): {value:.12g}")
    return value


def mixed_unitary_qfs(weights: Sequence[float], unitaries: Sequence, obs, rho_psi) -> float:
    """tr(A Phi(rho)) for Phi(rho) = sum_i p_i U_i rho U_i^dagger."""
    return weighted_power_sum(len(unitaries), 1, weights, list(unitaries), obs, rho_psi)


def twirl_spec(twirl_set: Sequence, weights: Sequence[float], inner: Channel, obs, rho_psi,
               ancilla_states: Sequence = None) -> ForkSpec:
    """Every slot s runs U_{s+1}, then ``inner``, then U_{s+1}^dagger."""
    d = len(twirl_set)
    branch_channels = [conjugated(inner, u) for u in twirl_set]
    return power_sum_spec(d, 1, weights, branch_channels, as_matrix(obs), rho_psi, ancilla_states=ancilla_states)


def twirl_qfs(twirl_set: Sequence, weights: Sequence[float], inner: Channel, obs, rho_psi) -> float:
    """tr(A Lambda_bar(rho)) with Lambda_bar(rho) = sum_i p_i U_i^dagger Lambda(U_i rho U_i^dagger) U_i."""
    value = run(twirl_spec(twirl_set, weights, inner, obs, rho_psi)).value
    logger.info(f"Twirled expectation over {len(twirl_set)} unitaries: {value:.12g}")
    return value


def witness_spec(rho_Psi, weights: Sequence[float] = None) -> ForkSpec:
    """Qutrit-controlled circuit measuring (<XX> - <YY> + <ZZ>) / 3 through <ZZ>.

    Branch basis changes: H (x) H turns ZZ into XX; (H S^dagger) (x) (H S)
    turns it into Y (x) (-Y); the third branch measures ZZ as is.
    """
    if weights is not None and not np.allclose(weights, [1 / 3] * 3, atol=1e-12, rtol=0):
        raise ValidationError("The witness mapping needs equal weights 1/3")
    target = QuantumState.coerce(rho_Psi, 4)
    if target.dim != 4:
        raise ValidationError(f"Witness input must be a two-qubit state, got dim {target.dim}")
    basis_changes = [
        unitary_channel(np.kron(H, H), name="HxH"),
        unitary_channel(np.kron(H @ SDG, H @ S), name="HSdgxHS"),
        unitary_channel(np.kron(I2, I2), name="IxI"),
    ]
    return ForkSpec(d=3, q=1, control=ControlSpec.pure([1 / 3] * 3), slot_radix=4,
                    target_state=target, ancilla_states=tuple(_default_ancillas(2, 4)),
                    slot_pipelines=(tuple((ch,) for ch in basis_changes),),
                    measurement=ExpectationMeasurement(np.kron(Z, Z)))


def teleportation_witness_qfs(rho_Psi, weights: Sequence[float] = None) -> WitnessReport:
    """Estimate the teleportation witness of a two-qubit state.

    Args:
        rho_Psi: Two-qubit state vector, density matrix or QuantumState
        weights: Control weights, equal thirds by default

    Returns:
        WitnessReport with the measured value and the witness
    """
    measured = run(witness_spec(rho_Psi, weights)).value
    witness = (1 - 3 * measured) / 4
    report = WitnessReport(qfs_measured=measured, witness_value=witness,
                           entangled_flag=bool(witness < -ATOL_ORACLE))
    logger.info(f"Teleportation witness: {witness:.12g} (entangled={report.entangled_flag})")
    return report


def purity_spec(inner: Channel, rho_psi, control_mode: str = 'qutrit') -> ForkSpec:
    """Two target copies, three branches measuring X, Y, Z via <ZZ>.

    ``inner`` runs first on every slot, targets and ancillae alike; then
    branch 1 applies H, branch 2 applies H S^dagger, branch 3 nothing.
    """
    if inner.dim != 2:
        raise ValidationError(f"Purity benchmarking needs a single-qubit channel, got dim {inner.dim}")
    if control_mode == 'qutrit':
        control = ControlSpec.uniform(3)
    elif control_mode == 'two_qubit':
        control = ControlSpec.encoded(np.kron(H, ry(ENCODED_CONTROL_THETA)), [[0], [2], [1, 3]])
    else:
        raise ValidationError(f"Unknown control mode: {control_mode}")
    basis_changes = [unitary_channel(H, name="H"), unitary_channel(H @ SDG, name="HSdg"), None]
    per_copy = tuple((inner,) if change is None else (inner, change) for change in basis_changes)
    return ForkSpec(d=3, q=2, control=control, slot_radix=2,
                    target_state=QuantumState.coerce(rho_psi, 2),
                    ancilla_states=tuple(_default_ancillas(4, 2)),
                    slot_pipelines=(per_copy, per_copy),
                    measurement=ExpectationMeasurement(np.kron(Z, Z)))


def purity_qfs(inner: Channel, rho_psi, control_mode: str = 'qutrit') -> PurityReport:
    """Single-qubit purity P = <X>^2 + <Y>^2 + <Z>^2 of inner(rho)."""
    spec = purity_spec(inner, rho_psi, control_mode)
    measured = run(spec).value
    out = inner.apply(spec.target_state.density_matrix())
    report = PurityReport(qfs_measured=measured, purity_sum=3 * measured,
                          trace_purity=float(np.trace(out @ out).real))
    logger.info(f"Purity ({control_mode} control): P={report.purity_sum:.12g}")
    return report


def _check_axis(axis: str) -> str:
    axis = axis.lower()
    if axis not in AXES:
        raise ValidationError(f"Unknown axis '{axis}'; expected one of {', '.join(AXES)}")
    return axis


def axis_spec(axis: str, theta: float) -> ForkSpec:
    """Two branches over R_axis(theta)|0>; H on slot 1 turns branch 2 into an X measurement."""
    axis = _check_axis(axis)
    psi = rotation(axis, theta)[:, 0]
    pipelines = (((), (unitary_channel(H, name="H"),)),)
    return ForkSpec(d=2, q=1, control=ControlSpec.pure([0.5, 0.5]), slot_radix=2,
                    target_state=QuantumState.from_vector(psi),
                    ancilla_states=tuple(_default_ancillas(1, 2)),
                    slot_pipelines=pipelines, measurement=ExpectationMeasurement(Z))


def axis_discrimination(axis: str, theta: float) -> float:
    """(<Z> + <X>) / 2 of R_axis(theta)|0>, read from one <Z> measurement."""
    return run(axis_spec(axis, theta)).value


def theory_value(axis: str, theta: float) -> float:
    axis = _check_axis(axis)
    if axis == 'x':
        return cos(theta) / 2
    if axis == 'y':
        return (cos(theta) + sin(theta)) / 2
    return 0.5


def theory_curve(axis: str, thetas: Sequence[float]) -> List[float]:
    """Closed-form axis-discrimination values."""
    return [theory_value(axis, t) for t in thetas]
