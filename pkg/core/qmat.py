"""
Dense complex-matrix toolkit for small qubit systems.

Basis convention: computational states |q0 q1 ... q(n-1)>, with factor 0 the
leftmost Kronecker factor (the most significant bit of the row index). In the
teleportation protocol factor 0 is Alice's input qubit. |0> is spin up
(sigma^z = +1).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from config import config
from core.exceptions import DimensionError, InvalidStateError


class PauliLabel(Enum):
    I = "i"
    X = "x"
    Y = "y"
    Z = "z"


class BellLabel(Enum):
    PSI_PLUS = "Psi+"
    PSI_MINUS = "Psi-"
    PHI_PLUS = "Phi+"
    PHI_MINUS = "Phi-"

    @property
    def is_psi(self) -> bool:
        return self in (BellLabel.PSI_PLUS, BellLabel.PSI_MINUS)


_PAULI = {
    PauliLabel.I: np.array([[1, 0], [0, 1]], dtype=complex),
    PauliLabel.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliLabel.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliLabel.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

_SQRT_HALF = 1.0 / np.sqrt(2.0)

_BELL_VECTORS = {
    BellLabel.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQRT_HALF,
    BellLabel.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQRT_HALF,
    BellLabel.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQRT_HALF,
    BellLabel.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQRT_HALF,
}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix of dimension 2^n."""

    entries: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidStateError(f"Density matrix must be square, got shape {matrix.shape}")
        dim = matrix.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise InvalidStateError(f"Dimension {dim} is not a power of two")
        if dim > 2 ** config.MAX_QUBITS:
            raise DimensionError(f"Dimension {dim} exceeds 2^{config.MAX_QUBITS}")
        _check_state(matrix)
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.trace(self.entries @ operator).real)


MatrixLike = Union[DensityMatrix, np.ndarray]


def _as_array(matrix: MatrixLike) -> np.ndarray:
    if isinstance(matrix, DensityMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=complex)


def _check_state(matrix: np.ndarray):
    if not np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=config.HERMITIAN_TOL):
        raise InvalidStateError("Matrix is not Hermitian")
    trace = np.trace(matrix)
    if abs(trace - 1.0) > config.TRACE_TOL:
        raise InvalidStateError(f"Trace {trace.real:.15g} differs from 1")
    smallest = np.linalg.eigvalsh(matrix)[0]
    if smallest < -config.PSD_TOL:
        raise InvalidStateError(f"Matrix is not positive semidefinite (eigenvalue {smallest:.3e})")


def pauli(axis: Union[PauliLabel, str]) -> np.ndarray:
    """Standard 2x2 Pauli matrix, or the identity for axis 'i'."""
    label = axis if isinstance(axis, PauliLabel) else PauliLabel(str(axis).lower())
    return _PAULI[label].copy()


def bell_state(label: BellLabel) -> np.ndarray:
    return _BELL_VECTORS[label].copy()


def bell_projector(label: BellLabel) -> DensityMatrix:
    """Rank-one projector |j><j| onto a Bell state."""
    vector = _BELL_VECTORS[label]
    return DensityMatrix(np.outer(vector, vector.conj()))


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    dim = 2 ** num_qubits
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    dim = a.dim * b.dim
    if dim > 2 ** config.MAX_QUBITS:
        raise DimensionError(f"Tensor product dimension {dim} exceeds 2^{config.MAX_QUBITS}")
    return DensityMatrix(np.kron(a.entries, b.entries))


def partial_trace_array(operator: MatrixLike, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Partial trace of any square operator, keeping the listed factors in order."""
    matrix = _as_array(operator)
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    total = int(np.prod(dims))
    if matrix.shape != (total, total):
        raise DimensionError(f"Factor dimensions {dims} do not match matrix shape {matrix.shape}")
    if not keep:
        raise DimensionError("At least one factor must be kept")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"Kept factors {keep} out of range for {len(dims)} factors")

    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    tensor_form = matrix.reshape(dims + dims)
    # Move kept row/column axes to the front, traced ones to the back
    order = keep + [n + k for k in keep] + traced + [n + t for t in traced]
    tensor_form = np.transpose(tensor_form, order)
    kept_dim = int(np.prod([dims[k] for k in keep]))
    traced_dim = int(np.prod([dims[t] for t in traced])) if traced else 1
    tensor_form = tensor_form.reshape(kept_dim, kept_dim, traced_dim, traced_dim)
    return np.trace(tensor_form, axis1=2, axis2=3)


def partial_trace(rho: DensityMatrix, keep: Sequence[int], dims: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on the kept factors."""
    return DensityMatrix(partial_trace_array(rho, keep, dims))


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    if values[0] < -config.PSD_TOL:
        raise InvalidStateError(f"Matrix square root of non-PSD input (eigenvalue {values[0]:.3e})")
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.conj().T


def uhlmann_fidelity(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Squared Uhlmann fidelity [Tr sqrt(sqrt(r1) r2 sqrt(r1))]^2."""
    if r1.dim != r2.dim:
        raise DimensionError(f"Dimension mismatch: {r1.dim} vs {r2.dim}")
    root = _psd_sqrt(r1.entries)
    inner = root @ r2.entries @ root
    inner = 0.5 * (inner + inner.conj().T)
    values = np.linalg.eigvalsh(inner)
    if values[0] < -config.PSD_TOL:
        raise InvalidStateError(f"Fidelity kernel is not PSD (eigenvalue {values[0]:.3e})")
    fidelity = float(np.sum(np.sqrt(np.clip(values, 0.0, None))) ** 2)
    return min(max(fidelity, 0.0), 1.0)


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Half the trace norm of the difference, from Hermitian eigenvalues."""
    if r1.dim != r2.dim:
        raise DimensionError(f"Dimension mismatch: {r1.dim} vs {r2.dim}")
    difference = r1.entries - r2.entries
    values = np.linalg.eigvalsh(0.5 * (difference + difference.conj().T))
    return min(float(0.5 * np.sum(np.abs(values))), 1.0)


def bloch_vector(rho: DensityMatrix) -> np.ndarray:
    if rho.dim != 2:
        raise DimensionError(f"Bloch vector needs a qubit state, got dimension {rho.dim}")
    return np.array([rho.expectation(_PAULI[axis]) for axis in (PauliLabel.X, PauliLabel.Y, PauliLabel.Z)])


def bloch_trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Qubit trace distance as half the Euclidean Bloch-vector distance."""
    return float(0.5 * np.linalg.norm(bloch_vector(r1) - bloch_vector(r2)))


def random_density_matrix(num_qubits: int, rng: np.random.Generator, rank: int = None) -> DensityMatrix:
    """Random mixed state from a Ginibre matrix of the given rank (full rank by default)."""
    dim = 2 ** num_qubits
    rank = dim if rank is None else rank
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = ginibre @ ginibre.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)
