"""Shared complex linear algebra helpers.

Matrices and state vectors are plain ``numpy`` arrays of dtype complex128;
validation happens at module boundaries rather than through wrapper types.
Tensor products follow the controller-first convention everywhere:
``kron(controller_op, system_op)`` and basis index ``c * dim_s + s``.
"""

from __future__ import annotations

import numpy as np

# Input validation tolerance; round-trip assertions use the tighter value.
NORM_TOL = 1e-9
ROUNDTRIP_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SWAP4 = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class DimensionError(ValueError):
    """Operands have incompatible or unexpected dimensions."""


def as_complex_matrix(M, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of ndim {M.ndim}")
    if rows is not None and M.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {M.shape[0]}")
    if cols is not None and M.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {M.shape[1]}")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def phase_gate(phi: float) -> np.ndarray:
    """diag(e^{i phi}, e^{-i phi}) acting on a two-level system."""
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def is_unitary(M: np.ndarray, tol: float = NORM_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0])) <= tol


def require_unitary(M, tol: float = NORM_TOL, what: str = "matrix") -> np.ndarray:
    M = as_complex_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {M.shape}")
    err = np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0]))
    if err > tol:
        raise ValueError(f"{what} is not unitary: deviation {err:.3e} > {tol:.1e}")
    return M


def closest_unitary(M: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition (nearest in Frobenius norm)."""
    u, _, vh = np.linalg.svd(M)
    return u @ vh


def phase_align(A: np.ndarray, B: np.ndarray) -> tuple[float, float]:
    """Distance between A and B modulo one global phase.

    Returns ``(distance, phase)`` where ``distance = min_phi ||e^{i phi} A - B||_F``
    and ``phase`` attains the minimum.  The optimal phase is the argument of
    the trace inner product; the norm is then evaluated by direct subtraction,
    which avoids the cancellation floor of the purely trace-based expression.
    """
    t = np.trace(dagger(A) @ B)
    phase = float(np.angle(t))
    dist = float(np.linalg.norm(np.exp(1j * phase) * A - B))
    return dist, phase


def phase_distance(A: np.ndarray, B: np.ndarray) -> float:
    return phase_align(A, B)[0]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_state_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-like random pure state: normalized complex Gaussian vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def controller_system_kron(ctrl_op: np.ndarray, sys_op: np.ndarray) -> np.ndarray:
    return np.kron(ctrl_op, sys_op)
