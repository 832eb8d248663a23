"""Cosine-sine factorization of block-partitioned unitaries.

A 2n x 2n unitary splits into four n x n blocks; the factorization writes it
as corner unitaries around a rotation-like core,

    U = (left (+) lower_left) . [[C, S], [-S, C]] . (right (+) lower_right)^dag

with C = diag(cos theta_i), S = diag(sin theta_i).  The same singular-value
machinery expresses a completeness-satisfying operator pair as
K0 = left C right^dag, K1 = i . left_lower S right^dag, and embeds the pair
into a coupling unitary whose controller blocks reproduce it exactly.

The factorization here is gauge-fixed to be deterministic: angles are sorted
with cos(theta) non-increasing, and column phases are set so the first
nonzero entry of each column of the right factor is real positive.
Reconstruction is phase-exact, not merely up to a global phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausSet
from .linalg import (
    NORM_TOL,
    DimensionError,
    as_complex_matrix,
    closest_unitary,
    dagger,
    phase_gate,
    require_unitary,
    HADAMARD,
)

# Below this sine value the corner columns are recovered from the lower-right
# block (quotient by sin(theta) would amplify rounding); see _refine_kernel.
_KERNEL_TOL = 1e-4
# In kraus_svd the completion columns are free; switch once the quotient's
# contribution to the reconstruction would still sit under NORM_TOL.
_COMPLETION_TOL = 1e-10


@dataclass(frozen=True)
class CSFactors:
    """Factor bundle of the cosine-sine form.

    ``left``/``lower_left`` are the output-side corner unitaries, stored in
    the operator-pair normalization: K0 = left C right^dag and
    K1 = i . lower_left S right^dag, i.e. the assembled unitary's lower
    output corner is -i . lower_left.  ``lower_right`` is the remaining
    input-side corner when it is not gauge-fixed to ``-i . right``.  Angles
    are radians in [0, pi/2], sorted with cos(theta) non-increasing.
    """

    left: np.ndarray
    lower_left: np.ndarray
    right: np.ndarray
    thetas: np.ndarray
    lower_right: np.ndarray | None = None

    def __post_init__(self):
        n = self.left.shape[0]
        for name in ("left", "lower_left", "right"):
            object.__setattr__(
                self, name, require_unitary(getattr(self, name), what=name)
            )
        if self.lower_right is not None:
            object.__setattr__(
                self, "lower_right", require_unitary(self.lower_right, what="lower_right")
            )
        th = np.asarray(self.thetas, dtype=float).reshape(-1)
        if th.shape[0] != n:
            raise DimensionError("need one angle per corner dimension")
        if np.any(th < -1e-12) or np.any(th > np.pi / 2 + 1e-12):
            raise ValueError(f"angles outside [0, pi/2]: {th}")
        if np.any(np.diff(np.cos(th)) > 1e-12):
            raise ValueError("angles must be sorted with cos(theta) non-increasing")
        object.__setattr__(self, "thetas", np.clip(th, 0.0, np.pi / 2))

    @property
    def n(self) -> int:
        return self.left.shape[0]

    @property
    def cos_block(self) -> np.ndarray:
        return np.diag(np.cos(self.thetas))

    @property
    def sin_block(self) -> np.ndarray:
        return np.diag(np.sin(self.thetas))

    @property
    def phase_core(self) -> np.ndarray:
        """Diagonal core C + iS = diag(e^{i theta})."""
        return np.diag(np.exp(1j * self.thetas))

    def effective_lower_right(self) -> np.ndarray:
        """Lower-right input corner; defaults to the -i*right gauge."""
        if self.lower_right is not None:
            return self.lower_right
        return -1j * self.right


def _fix_column_phases(cols: np.ndarray, *followers: np.ndarray) -> None:
    """Rephase columns in place so each column's first nonzero entry is real
    positive; the same phases are applied to the follower matrices."""
    for j in range(cols.shape[1]):
        idx = np.flatnonzero(np.abs(cols[:, j]) > 1e-12)
        if len(idx) == 0:
            continue
        ph = cols[idx[0], j] / abs(cols[idx[0], j])
        cols[:, j] /= ph
        for f in followers:
            f[:, j] /= ph


def _orth_complement(cols: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the complement of span(cols), canonical phases."""
    if cols.shape[1] == 0:
        return np.eye(n, dtype=complex)
    Q, _ = np.linalg.qr(cols, mode="complete")
    comp = Q[:, cols.shape[1]:].copy()
    _fix_column_phases(comp)
    return comp


def cs_decompose(U, n: int) -> CSFactors:
    """Factor a 2n x 2n unitary into the cosine-sine form.

    The upper-left block is SVD'd for the angles and the outer corners; the
    remaining corners follow from the unitarity constraints.  Angles close to
    zero make those quotients ill-conditioned, so the near-kernel subspace is
    re-derived jointly from the off-diagonal blocks (_refine_kernel), which
    keeps the reconstruction error at rounding level even for degenerate or
    clustered angles.
    """
    U = require_unitary(U, what="input unitary")
    if U.shape[0] != 2 * n:
        raise DimensionError(f"U has dim {U.shape[0]}, expected {2 * n}")
    U00, U01 = U[:n, :n], U[:n, n:]
    U10, U11 = U[n:, :n], U[n:, n:]

    left, c, rh = np.linalg.svd(U00)
    c = np.clip(c, 0.0, 1.0)
    right = dagger(rh)
    left = np.ascontiguousarray(left)
    _fix_column_phases(right, left)
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    thetas = np.arctan2(s, c)

    ker = s < _KERNEL_TOL
    det = ~ker
    lower_left = np.zeros((n, n), dtype=complex)
    lower_right = np.zeros((n, n), dtype=complex)
    if det.any():
        lower_left[:, det] = -(U10 @ right)[:, det] / s[det]
        lower_right[:, det] = (dagger(U01) @ left)[:, det] / s[det]
    if ker.any():
        _refine_kernel(
            U00, U01, U10, U11, left, right, lower_left, lower_right, thetas, ker, det
        )
    _fix_column_phases(right, left, lower_left, lower_right)
    left = closest_unitary(left)
    right = closest_unitary(right)
    lower_left = closest_unitary(lower_left)
    lower_right = closest_unitary(lower_right)
    return CSFactors(
        left=left,
        lower_left=1j * lower_left,
        right=right,
        thetas=thetas,
        lower_right=lower_right,
    )


def _refine_kernel(U00, U01, U10, U11, left, right, lower_left, lower_right,
                   thetas, ker, det):
    """Recover the near-kernel columns (sin(theta) ~ 0) of all four corners.

    On that subspace the coupling between the diagonal blocks is O(sin theta),
    so the corner columns are read from the off-diagonal data directly: the
    compressed block left_k^dag U01 Rc carries exactly cos*sin of the small
    angles, and its SVD pairs the input/output bases consistently.
    """
    n = U00.shape[0]
    idx = np.flatnonzero(ker)
    Lk, Rk = left[:, idx], right[:, idx]
    Lc = _orth_complement(lower_left[:, det], n)
    Rc = _orth_complement(lower_right[:, det], n)
    A = dagger(dagger(Lk) @ U00 @ Rk) @ (dagger(Lk) @ U01 @ Rc)
    W, sig, Vh = np.linalg.svd(A)
    order = np.argsort(sig, kind="stable")  # ascending theta, stable on ties
    W, sig, Vh = W[:, order], sig[order], Vh[order, :]
    th = 0.5 * np.arcsin(np.clip(2.0 * sig, 0.0, 1.0))
    ck = np.cos(th)
    Rk_new = Rk @ W
    Rp_new = Rc @ dagger(Vh)
    left[:, idx] = (U00 @ Rk_new) / ck
    right[:, idx] = Rk_new
    lower_right[:, idx] = Rp_new
    lower_left[:, idx] = (U11 @ Rp_new) / ck
    thetas[idx] = th


def reconstruct(factors: CSFactors) -> np.ndarray:
    """Assemble the unitary from its factors (phase-exact)."""
    n = factors.n
    C, S = factors.cos_block, factors.sin_block
    ll = -1j * factors.lower_left  # undo the stored i prefactor
    lr = factors.effective_lower_right()
    U = np.zeros((2 * n, 2 * n), dtype=complex)
    U[:n, :n] = factors.left @ C @ dagger(factors.right)
    U[:n, n:] = factors.left @ S @ dagger(lr)
    U[n:, :n] = -ll @ S @ dagger(factors.right)
    U[n:, n:] = ll @ C @ dagger(lr)
    return U


@dataclass(frozen=True)
class CSMatrixSplit:
    """Three-factor split of the rotation-like core into controller-local
    transforms around a conditional phase pair diag(core, core^dag)."""

    thetas: np.ndarray
    outer_left: np.ndarray
    middle: np.ndarray
    outer_right: np.ndarray

    def product(self) -> np.ndarray:
        return self.outer_left @ self.middle @ self.outer_right

    def cs_matrix(self) -> np.ndarray:
        n = len(self.thetas)
        C = np.diag(np.cos(self.thetas))
        S = np.diag(np.sin(self.thetas))
        return np.block([[C, S], [-S, C]])


def split_cs_matrix(thetas) -> CSMatrixSplit:
    """Split [[C,S],[-S,C]] as (P(pi/4)^dag H (x) 1) (core (+) core^dag) (H P(pi/4) (x) 1)."""
    th = np.asarray(thetas, dtype=float).reshape(-1)
    if np.any(th < -1e-12) or np.any(th > np.pi / 2 + 1e-12):
        raise ValueError(f"angles outside [0, pi/2]: {th}")
    n = len(th)
    eye = np.eye(n, dtype=complex)
    core = np.diag(np.exp(1j * th))
    middle = np.zeros((2 * n, 2 * n), dtype=complex)
    middle[:n, :n] = core
    middle[n:, n:] = dagger(core)
    outer_left = np.kron(dagger(phase_gate(np.pi / 4)) @ HADAMARD, eye)
    outer_right = np.kron(HADAMARD @ phase_gate(np.pi / 4), eye)
    return CSMatrixSplit(th, outer_left, middle, outer_right)


def kraus_svd(K0, K1) -> CSFactors:
    """Joint singular-value form of a completeness-satisfying operator pair.

    K0 = left C right^dag and K1 = i . lower_left S right^dag share the input
    basis; completeness makes the columns of K1 right orthogonal with norms
    sin(theta), so lower_left is determined wherever sin(theta) is resolvable
    and completed to a unitary (canonical phases) on the kernel, where the
    choice cannot affect the pair.
    """
    K0 = as_complex_matrix(K0)
    K1 = as_complex_matrix(K1, *K0.shape)
    pair = KrausSet((K0, K1))  # validates dimensions + completeness
    n = pair.dim

    left, c, rh = np.linalg.svd(K0)
    c = np.clip(c, 0.0, 1.0)
    right = dagger(rh)
    left = np.ascontiguousarray(left)
    _fix_column_phases(right, left)
    s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    thetas = np.arctan2(s, c)

    lower_left = np.zeros((n, n), dtype=complex)
    det = s > _COMPLETION_TOL
    X = -1j * (K1 @ right)
    if det.any():
        lower_left[:, det] = X[:, det] / s[det]
    if (~det).any():
        lower_left[:, ~det] = _orth_complement(lower_left[:, det], n)
    lower_left = closest_unitary(lower_left)

    factors = CSFactors(left=left, lower_left=lower_left, right=right, thetas=thetas)
    err = np.linalg.norm(K0 - factors.left @ factors.cos_block @ dagger(factors.right))
    err += np.linalg.norm(
        K1 - 1j * factors.lower_left @ factors.sin_block @ dagger(factors.right)
    )
    if err > NORM_TOL:
        raise ValueError(
            f"operator pair admits no unitary completion within tolerance ({err:.3e})"
        )
    return factors


def control_unitary_from_kraus(K0, K1) -> tuple[np.ndarray, CSFactors]:
    """Embed an operator pair into its coupling unitary, lower-right gauge-fixed.

    The gauge choice lower_right = -i*right collapses the input-side
    conditional into a system-local transform, so the assembled unitary is
    [[K0, i.left S right^dag], [K1, -i.lower_left C right^dag]] and controller
    block extraction returns the pair exactly.
    """
    factors = kraus_svd(K0, K1)
    n = factors.n
    C, S = factors.cos_block, factors.sin_block
    ll = -1j * factors.lower_left
    U = np.zeros((2 * n, 2 * n), dtype=complex)
    U[:n, :n] = factors.left @ C @ dagger(factors.right)
    U[:n, n:] = 1j * factors.left @ S @ dagger(factors.right)
    U[n:, :n] = -ll @ S @ dagger(factors.right)
    U[n:, n:] = 1j * ll @ C @ dagger(factors.right)
    return U, factors
