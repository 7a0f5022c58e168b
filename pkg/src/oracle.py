"""Brute-force reference values, one trajectory at a time.

Nothing here touches the forking engine: every value is computed by applying
each branch's channel to the input state directly and combining the
per-branch expectations classically.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ValidationError
from src.gates_channels import I2, X, Y, Z, Channel, check_weights, unitary_channel
from src.quantum_state import QuantumState
from src.tensor_core import as_matrix, dagger

logger = logging.getLogger(__name__)

# (II - XX + YY - ZZ) / 4
WITNESS_OPERATOR = (np.kron(I2, I2) - np.kron(X, X) + np.kron(Y, Y) - np.kron(Z, Z)) / 4
WITNESS_OPERATOR.setflags(write=False)


@dataclass(frozen=True)
class TrajectoryResult:
    """Outcome of one branch evolved on its own.

    ``expectations`` holds one value per copy; ``probability`` is the
    product of per-copy projector probabilities in projective mode.
    """

    branch: int
    expectations: Tuple[float, ...] = ()
    probability: Optional[float] = None

    @property
    def product(self) -> float:
        return float(np.prod(self.expectations))


def _to_channel(ch) -> Channel:
    if isinstance(ch, Channel):
        return ch
    return unitary_channel(ch)


def trajectory_states(channels: Sequence, rho_psi) -> List[np.ndarray]:
    """Lambda_i(rho) for every branch, as density matrices."""
    rho = QuantumState.coerce(rho_psi).density_matrix()
    outputs = []
    for ch in channels:
        ch = _to_channel(ch)
        if ch.dim != rho.shape[0]:
            raise ValidationError(f"Channel on dim {ch.dim} cannot act on a dim-{rho.shape[0]} state")
        outputs.append(ch.apply(rho))
    return outputs


def _per_copy(ops, q: int) -> List[np.ndarray]:
    if isinstance(ops, np.ndarray) and ops.ndim == 2:
        return [ops] * q
    mats = [as_matrix(m) for m in ops]
    if len(mats) != q:
        raise ValidationError(f"Need {q} per-copy operators, got {len(mats)}")
    return mats


def trajectories(channels: Sequence, obs, rho_psi, q: int = 1, projectors=None) -> List[TrajectoryResult]:
    """Per-branch expectations (and projector probabilities when given)."""
    mats = _per_copy(obs, q)
    projs = None if projectors is None else _per_copy(projectors, q)
    results = []
    for i, out in enumerate(trajectory_states(channels, rho_psi), start=1):
        values = tuple(float(np.trace(m @ out).real) for m in mats)
        prob = None
        if projs is not None:
            prob = float(np.prod([np.clip(np.trace(p @ out).real, 0.0, 1.0) for p in projs]))
        results.append(TrajectoryResult(branch=i, expectations=values, probability=prob))
    return results


def oracle_power_sum(d: int, q: int, weights: Sequence[float], channels: Sequence, obs, rho_psi) -> float:
    """sum_i p_i prod_j <M_j>_{Lambda_i(rho)} evaluated branch by branch."""
    weights = check_weights(weights)
    if len(weights) != d or len(channels) != d:
        raise ValidationError(f"Need {d} weights and {d} channels")
    results = trajectories(channels, obs, rho_psi, q)
    return float(sum(p * r.product for p, r in zip(weights, results)))


def oracle_projective(d: int, q: int, weights: Sequence[float], channels: Sequence, projectors, rho_psi) -> float:
    """sum_i p_i prod_j Pr[m | Lambda_i(rho), copy j]."""
    weights = check_weights(weights)
    if len(weights) != d or len(channels) != d:
        raise ValidationError(f"Need {d} weights and {d} channels")
    dim = QuantumState.coerce(rho_psi).dim
    results = trajectories(channels, np.eye(dim), rho_psi, q, projectors=projectors)
    return float(sum(p * r.probability for p, r in zip(weights, results)))


def oracle_twirl(twirl_set: Sequence, weights: Sequence[float], inner: Channel, rho_psi) -> np.ndarray:
    """sum_i p_i U_i^dagger inner(U_i rho U_i^dagger) U_i, term by term."""
    weights = check_weights(weights)
    if len(weights) != len(twirl_set):
        raise ValidationError(f"{len(weights)} weights for {len(twirl_set)} unitaries")
    rho = QuantumState.coerce(rho_psi).density_matrix()
    out = np.zeros_like(rho)
    for p, u in zip(weights, twirl_set):
        u = as_matrix(u)
        out += p * dagger(u) @ inner.apply(u @ rho @ dagger(u)) @ u
    return out


def oracle_witness(rho_Psi) -> float:
    """tr(W_t rho) for the teleportation witness."""
    state = QuantumState.coerce(rho_Psi)
    if state.dim != 4:
        raise ValidationError(f"Witness needs a two-qubit state, got dim {state.dim}")
    return float(np.trace(WITNESS_OPERATOR @ state.density_matrix()).real)


def oracle_purity(rho) -> float:
    """<X>^2 + <Y>^2 + <Z>^2 of a single-qubit state."""
    state = QuantumState.coerce(rho)
    if state.dim != 2:
        raise ValidationError(f"Purity needs a single-qubit state, got dim {state.dim}")
    dm = state.density_matrix()
    return float(sum(np.trace(p @ dm).real ** 2 for p in (X, Y, Z)))
