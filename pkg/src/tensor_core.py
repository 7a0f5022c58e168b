"""Dense complex linear algebra over mixed-radix tensor-product spaces.

Matrices and vectors are plain ``numpy`` arrays with complex dtype. Composite
indices are big-endian: subsystem 0 is the most significant digit, so a
register ``[control, target, ancilla]`` is laid out exactly as the tensor
factors are written left to right.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.errors import DimensionLimitError, ValidationError

logger = logging.getLogger(__name__)

# Structural checks (unitarity, Hermiticity, normalization).
ATOL_STRUCTURAL = 1e-10
# Agreement between two independent computations of the same quantity.
ATOL_ORACLE = 1e-9


@dataclass(frozen=True)
class DimensionLimits:
    """Upper bounds on Hilbert-space dimension per representation."""

    max_pure_dim: int = 2 ** 12
    max_density_dim: int = 2 ** 8


_limits = DimensionLimits()


def set_dimension_limits(max_pure_dim: int = None, max_density_dim: int = None) -> DimensionLimits:
    """Install new dimension caps and return them.

    Args:
        max_pure_dim: Largest allowed amplitude-vector length
        max_density_dim: Largest allowed density-matrix side

    Returns:
        The limits now in force
    """
    global _limits
    pure = _limits.max_pure_dim if max_pure_dim is None else int(max_pure_dim)
    density = _limits.max_density_dim if max_density_dim is None else int(max_density_dim)
    if pure < 2 or density < 2:
        raise ValidationError(f"Dimension caps must be at least 2 (got pure={pure}, density={density})")
    _limits = DimensionLimits(max_pure_dim=pure, max_density_dim=density)
    logger.debug(f"Dimension limits set: pure={pure}, density={density}")
    return _limits


def get_dimension_limits() -> DimensionLimits:
    return _limits


def check_pure_dim(dim: int):
    if dim > _limits.max_pure_dim:
        raise DimensionLimitError(
            f"Amplitude vector of dimension {dim} exceeds the cap of {_limits.max_pure_dim}"
        )


def check_density_dim(dim: int):
    if dim > _limits.max_density_dim:
        raise DimensionLimitError(
            f"Density matrix of dimension {dim} exceeds the cap of {_limits.max_density_dim}"
        )


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"Expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("Matrix contains NaN or infinite entries")
    return m


def as_vector(v) -> np.ndarray:
    """Coerce ``v`` to a finite 1-D complex array."""
    vec = np.asarray(v, dtype=complex)
    if vec.ndim != 1 or vec.size < 1:
        raise ValidationError(f"Expected a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValidationError("Vector contains NaN or infinite entries")
    return vec


def kron(a, b) -> np.ndarray:
    """Kronecker product, checked against the configured dimension caps."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        check_pure_dim(a.size * b.size)
        return np.kron(a, b)
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > 1 and cols > 1:
        check_density_dim(max(rows, cols))
    else:
        check_pure_dim(max(rows, cols))
    return np.kron(a, b)


def kron_all(factors: Iterable) -> np.ndarray:
    """Left-to-right Kronecker product of a non-empty sequence."""
    factors = list(factors)
    if not factors:
        raise ValidationError("kron_all needs at least one factor")
    result = np.asarray(factors[0], dtype=complex)
    for factor in factors[1:]:
        result = kron(result, factor)
    return result


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValidationError(f"Cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValidationError(f"Cannot add {a.shape} and {b.shape}")
    return a + b


def scale(a, factor: complex) -> np.ndarray:
    return complex(factor) * as_matrix(a)


def trace(a) -> complex:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"Trace of a non-square matrix {a.shape}")
    return complex(np.trace(a))


def is_hermitian(a, atol: float = ATOL_STRUCTURAL) -> bool:
    a = np.asarray(a, dtype=complex)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=atol, rtol=0)


def is_unitary(a, atol: float = ATOL_STRUCTURAL) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.allclose(a.conj().T @ a, np.eye(a.shape[0]), atol=atol, rtol=0)


def _check_layout(radices: Sequence[int], dim: int) -> List[int]:
    radices = [int(r) for r in radices]
    if any(r < 1 for r in radices):
        raise ValidationError(f"Radices must be positive, got {radices}")
    if int(np.prod(radices)) != dim:
        raise ValidationError(f"Layout {radices} has product {int(np.prod(radices))}, matrix side is {dim}")
    return radices


def partial_trace(rho, radices: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the kept subsystems.

    Args:
        rho: Square matrix over the full register
        radices: Dimension of each subsystem, most significant first
        keep: Subsystem indices to keep; output follows register order

    Returns:
        Density matrix over the kept subsystems
    """
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"partial_trace needs a square matrix, got {rho.shape}")
    radices = _check_layout(radices, rho.shape[0])
    n = len(radices)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValidationError(f"Subsystem index out of range in {keep} for {n} subsystems")
    if len(keep) == n:
        return rho.copy()

    tensor = rho.reshape(radices + radices)
    current = n
    for axis in reversed(range(n)):
        if axis in keep:
            continue
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
        current -= 1
    kept_dim = int(np.prod([radices[k] for k in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


def hermitian_eig(a, atol: float = ATOL_STRUCTURAL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns:
        Tuple of (ascending real eigenvalues, matrix with orthonormal eigenvector columns)
    """
    a = as_matrix(a)
    if not is_hermitian(a, atol=atol):
        raise ValidationError("hermitian_eig received a non-Hermitian matrix")
    # LAPACK heevd is deterministic for a fixed input
    values, vectors = np.linalg.eigh((a + a.conj().T) / 2)
    return values, vectors


def apply_to_axes(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int], conjugate: bool = False) -> np.ndarray:
    """Contract a square operator onto selected axes of a register tensor.

    ``op`` acts on the listed axes in the given order, so non-adjacent and
    permuted targets need no explicit permutation matrices.
    """
    axes = list(axes)
    k = len(axes)
    dims = [tensor.shape[ax] for ax in axes]
    op_tensor = np.asarray(op, dtype=complex).reshape(dims + dims)
    if conjugate:
        op_tensor = op_tensor.conj()
    contracted = np.tensordot(op_tensor, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(contracted, list(range(k)), axes)
