"""Random unitaries, states and channels for sweeps and the ``random`` CLI states."""

import numpy as np
from scipy.stats import unitary_group

from src.gates_channels import Channel
from src.quantum_state import QuantumState


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary."""
    return unitary_group.rvs(dim, random_state=_rng(seed))


def random_pure_state(dim: int, seed=None) -> QuantumState:
    rng = _rng(seed)
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState.from_vector(vec / np.linalg.norm(vec))


def random_density(dim: int, seed=None, rank: int = None) -> QuantumState:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    rng = _rng(seed)
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return QuantumState.from_density(rho / np.trace(rho).real)


def random_channel(dim: int, n_kraus: int = 2, seed=None) -> Channel:
    """Stinespring dilation of a Haar unitary on system (x) environment.

    K_a = (I (x) <a|) U (I (x) |0>) for environment states a.
    """
    u = random_unitary(dim * n_kraus, _rng(seed)).reshape(dim, n_kraus, dim, n_kraus)
    ops = tuple(np.ascontiguousarray(u[:, a, :, 0]) for a in range(n_kraus))
    return Channel(ops, name="random")


def random_weights(d: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    w = rng.random(d) + 1e-3
    return w / w.sum()
