"""Quantum states, two-outcome channels, and convergence-condition checks.

A preparation channel is certified by two properties relative to a target
state: every Kraus operator must leave the target invariant up to a scalar
(the stationarity check), and the adjoint images of the target must span the
system space (the attraction check).  Channels passing both drive arbitrary
initial states toward the target under iteration; ``iterate_channel`` records
the resulting fidelity trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    NORM_TOL,
    DimensionError,
    as_complex_matrix,
    dagger,
    require_unitary,
)


@dataclass(frozen=True)
class PureState:
    """Normalized complex state vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {n!r} differs from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        M = as_complex_matrix(self.matrix)
        if M.shape[0] != M.shape[1]:
            raise DimensionError(f"density matrix must be square, got {M.shape}")
        if np.linalg.norm(M - dagger(M)) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(M).real - 1.0) > NORM_TOL or abs(np.trace(M).imag) > NORM_TOL:
            raise ValueError(f"density matrix trace {np.trace(M)!r} differs from 1")
        evals = np.linalg.eigvalsh((M + dagger(M)) / 2)
        if evals.min() < -NORM_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min()!r}")
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class KrausSet:
    """Ordered operators of a trace-preserving channel; completeness enforced."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(as_complex_matrix(K) for K in self.operators)
        if not ops:
            raise ValueError("KrausSet needs at least one operator")
        d = ops[0].shape
        if d[0] != d[1]:
            raise DimensionError(f"Kraus operators must be square, got {d}")
        for K in ops:
            if K.shape != d:
                raise DimensionError("all Kraus operators must share one dimension")
        acc = sum(dagger(K) @ K for K in ops)
        err = np.linalg.norm(acc - np.eye(d[0]))
        if err > NORM_TOL:
            raise ValueError(f"completeness violated: ||sum K^dag K - I|| = {err:.3e}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def choi(self) -> np.ndarray:
        """Choi matrix of the channel; equal iff the channels are equal."""
        d = self.dim
        C = np.zeros((d * d, d * d), dtype=complex)
        for K in self.operators:
            v = K.reshape(-1)
            C += np.outer(v, v.conj())
        return C


@dataclass(frozen=True)
class FixpointReport:
    """Result of the target-stationarity check, one entry per operator."""

    eigenvalues: tuple
    residuals: tuple
    tol: float

    @property
    def ok(self) -> bool:
        return all(r <= self.tol for r in self.residuals)

    @property
    def failures(self) -> tuple:
        return tuple(i for i, r in enumerate(self.residuals) if r > self.tol)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    fidelity: float
    norm: float


@dataclass(frozen=True)
class IterationTrace:
    records: tuple
    fixpoint: FixpointReport | None = None
    span_ok: bool | None = None

    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.records])


def apply_channel(kraus: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    """One application of the channel rho -> sum_i K_i rho K_i^dag."""
    if kraus.dim != rho.dim:
        raise DimensionError(f"Kraus dim {kraus.dim} != state dim {rho.dim}")
    out = np.zeros_like(rho.matrix)
    for K in kraus:
        out += K @ rho.matrix @ dagger(K)
    out = (out + dagger(out)) / 2  # exact Hermiticity
    return DensityMatrix(out)


def fixpoint_check(kraus: KrausSet, target: PureState, tol: float = NORM_TOL) -> FixpointReport:
    """Check that each operator maps the target onto itself up to a scalar.

    The scalar is read off as the expectation value of the operator in the
    target state; the residual is the leftover component orthogonal to the
    ray.  Failures are reported, never raised.
    """
    if kraus.dim != target.dim:
        raise DimensionError(f"Kraus dim {kraus.dim} != target dim {target.dim}")
    t = target.amplitudes
    zs, residuals = [], []
    for K in kraus:
        z = complex(np.vdot(t, K @ t))
        zs.append(z)
        residuals.append(float(np.linalg.norm(K @ t - z * t)))
    return FixpointReport(tuple(zs), tuple(residuals), tol)


def span_check(kraus: KrausSet, target: PureState, tol: float = NORM_TOL) -> bool:
    """True iff the adjoint images of the target span the system space."""
    if kraus.dim != target.dim:
        raise DimensionError(f"Kraus dim {kraus.dim} != target dim {target.dim}")
    cols = np.column_stack([dagger(K) @ target.amplitudes for K in kraus])
    rank = int(np.sum(np.linalg.svd(cols, compute_uv=False) > tol))
    return rank == target.dim


def kraus_from_unitary(U, dim_c: int, dim_s: int, init_index: int = 0) -> KrausSet:
    """Extract the channel operators from a controller-system coupling unitary.

    With the controller prepared in basis state ``init_index`` and read out in
    the computational basis, operator i is the (i, init_index) controller block
    of U under the controller-first tensor ordering.
    """
    U = require_unitary(U, what="coupling unitary")
    if U.shape[0] != dim_c * dim_s:
        raise DimensionError(f"U has dim {U.shape[0]}, expected {dim_c * dim_s}")
    if not 0 <= init_index < dim_c:
        raise ValueError(f"init_index {init_index} outside [0, {dim_c})")
    ops = [
        U[i * dim_s:(i + 1) * dim_s, init_index * dim_s:(init_index + 1) * dim_s]
        for i in range(dim_c)
    ]
    return KrausSet(tuple(ops))


def kraus_with_controller_state(U, dim_c: int, dim_s: int, init: PureState) -> KrausSet:
    """Like :func:`kraus_from_unitary` but for an arbitrary controller input state."""
    U = require_unitary(U, what="coupling unitary")
    if init.dim != dim_c:
        raise DimensionError(f"controller state dim {init.dim} != {dim_c}")
    blocks = [
        [U[i * dim_s:(i + 1) * dim_s, j * dim_s:(j + 1) * dim_s] for j in range(dim_c)]
        for i in range(dim_c)
    ]
    ops = [sum(init.amplitudes[j] * blocks[i][j] for j in range(dim_c)) for i in range(dim_c)]
    return KrausSet(tuple(ops))


def fidelity(rho: DensityMatrix, target: PureState) -> float:
    """Overlap of the state with a pure target, clamped into [0, 1]."""
    if rho.dim != target.dim:
        raise DimensionError(f"state dim {rho.dim} != target dim {target.dim}")
    t = target.amplitudes
    val = complex(np.vdot(t, rho.matrix @ t))
    if abs(val.imag) > 1e-10 or val.real < -1e-10 or val.real > 1 + 1e-10:
        raise ValueError(f"fidelity {val!r} outside [0,1] beyond tolerance")
    return float(min(max(val.real, 0.0), 1.0))


def iterate_channel(
    kraus: KrausSet, rho0: DensityMatrix, target: PureState, n: int
) -> IterationTrace:
    """Apply the channel n times, recording fidelity and trace per step.

    The stationarity and span checks are evaluated first and attached to the
    trace as advisories; a failing check does not abort the iteration.
    """
    if n < 0:
        raise ValueError("iteration count must be >= 0")
    fp = fixpoint_check(kraus, target)
    sp = span_check(kraus, target)
    rho = rho0
    records = [TraceRecord(0, fidelity(rho, target), float(np.trace(rho.matrix).real))]
    for k in range(1, n + 1):
        rho = apply_channel(kraus, rho)
        records.append(TraceRecord(k, fidelity(rho, target), float(np.trace(rho.matrix).real)))
    return IterationTrace(tuple(records), fixpoint=fp, span_ok=sp)
