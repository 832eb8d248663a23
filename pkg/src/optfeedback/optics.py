"""Jones-calculus model of optical elements and circuit compilation.

Conventions (fixed once, validated by the composite-identity tests):

* polarisation basis: (vertical, horizontal) = (|0>, |1>)
* two-level beam-mode basis: (-m, +m) angular-momentum pair = (|0>, |1>)
* phase retarder  P(phi)      = diag(e^{i phi}, e^{-i phi})
* half-wave plate HWP(t)      = exp(-2it sigma_y) . sigma_z
* quarter-wave plate QWP(t)   = exp(-it sigma_y) . diag(1, i) . exp(+it sigma_y)
* balanced beam splitter      = real symmetric Hadamard on the path qubit
* polarisation-selective rotated prism PSDP(a) = 1 (+) sigma_x P(2*ell*a)^dag
* rotated image-inverting prism DOVE(a)        = P(2*ell*a) . sigma_x  on the
  mode pair with index ell

Two platforms are modelled.  PATH_POL couples a two-path interferometer
(controller) to polarisation (system); POL_OAM couples polarisation
(controller) to an angular-momentum mode pair (system) in a single beam.
Circuits list elements in application order (first applied = first in list).

Angles are stored in degrees internally so that the text netlist format
(degrees) round-trips bit-exactly; every angle-taking constructor accepts
radians and all matrix formulas convert back, which costs at most one ulp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .csdecomp import CSFactors
from .channels import PureState
from .linalg import (
    HADAMARD,
    I2,
    SIGMA_X,
    SIGMA_Z,
    DimensionError,
    dagger,
    phase_align,
    phase_gate,
    require_unitary,
)


class NotImplementableError(ValueError):
    """A requested transform has no realization from the available elements."""


class IllegalElementError(ValueError):
    """Element used on a platform it is not defined for."""


class PlatformKind(Enum):
    PATH_POL = "PATH_POL"
    POL_OAM = "POL_OAM"


@dataclass(frozen=True)
class Platform:
    kind: PlatformKind
    ell: int = 0

    def __post_init__(self):
        if self.kind is PlatformKind.POL_OAM:
            if not isinstance(self.ell, int) or self.ell == 0:
                raise ValueError("POL_OAM platform needs a nonzero integer mode index")
        elif self.ell != 0:
            raise ValueError("PATH_POL platform carries no mode index")

    @classmethod
    def path_pol(cls) -> "Platform":
        return cls(PlatformKind.PATH_POL)

    @classmethod
    def pol_oam(cls, ell: int) -> "Platform":
        return cls(PlatformKind.POL_OAM, ell)


class ElementKind(Enum):
    HWP = "HWP"
    QWP = "QWP"
    POL_PHASE = "POL_PHASE"
    OAM_PHASE = "OAM_PHASE"
    BS = "BS"
    PSDP = "PSDP"
    DOVE = "DOVE"
    SPIRAL = "SPIRAL"
    MODE_CONV_PI = "MODE_CONV_PI"
    MODE_CONV_PI2 = "MODE_CONV_PI2"
    PBS = "PBS"
    MODE_SORTER_PARITY = "MODE_SORTER_PARITY"
    EOM = "EOM"
    ARM_PHASE = "ARM_PHASE"


_ANGLED = {
    ElementKind.HWP, ElementKind.QWP, ElementKind.POL_PHASE, ElementKind.OAM_PHASE,
    ElementKind.PSDP, ElementKind.DOVE, ElementKind.MODE_CONV_PI,
    ElementKind.MODE_CONV_PI2, ElementKind.ARM_PHASE,
}

# Platform legality.  SPIRAL and MODE_SORTER_PARITY exist for the ancilla
# bookkeeping setups only; they act outside the two-level mode pair and have
# no matrix on either compile platform.
_LEGAL = {
    ElementKind.HWP: {PlatformKind.PATH_POL, PlatformKind.POL_OAM},
    ElementKind.QWP: {PlatformKind.PATH_POL, PlatformKind.POL_OAM},
    ElementKind.POL_PHASE: {PlatformKind.PATH_POL, PlatformKind.POL_OAM},
    ElementKind.OAM_PHASE: {PlatformKind.POL_OAM},
    ElementKind.BS: {PlatformKind.PATH_POL},
    ElementKind.PSDP: {PlatformKind.POL_OAM},
    ElementKind.DOVE: {PlatformKind.POL_OAM},
    ElementKind.SPIRAL: set(),
    ElementKind.MODE_CONV_PI: {PlatformKind.POL_OAM},
    ElementKind.MODE_CONV_PI2: {PlatformKind.POL_OAM},
    ElementKind.PBS: {PlatformKind.PATH_POL, PlatformKind.POL_OAM},
    ElementKind.MODE_SORTER_PARITY: set(),
    ElementKind.EOM: {PlatformKind.PATH_POL, PlatformKind.POL_OAM},
    ElementKind.ARM_PHASE: {PlatformKind.PATH_POL},
}

ARM_BOTH = "both"


@dataclass(frozen=True)
class OpticalElement:
    kind: ElementKind
    angle_deg: float = 0.0
    arm: str = ARM_BOTH          # PATH_POL routing tag: "0", "1" or "both"
    on: bool = True              # EOM switching state
    shift: int = 0               # SPIRAL mode increment

    def __post_init__(self):
        if self.kind in _ANGLED:
            object.__setattr__(self, "angle_deg", float(self.angle_deg) % 360.0)
        elif self.angle_deg:
            raise ValueError(f"{self.kind.value} takes no angle")
        if self.arm not in ("0", "1", ARM_BOTH):
            raise ValueError(f"arm must be '0', '1' or 'both', got {self.arm!r}")
        if self.kind is ElementKind.ARM_PHASE and self.arm == ARM_BOTH:
            raise ValueError("ARM_PHASE needs a definite arm")
        if self.kind is ElementKind.SPIRAL and self.shift == 0:
            raise ValueError("SPIRAL needs a nonzero mode increment")

    @property
    def angle_rad(self) -> float:
        return math.radians(self.angle_deg)


def _angled(kind: ElementKind, angle_rad: float, **kw) -> OpticalElement:
    return OpticalElement(kind, angle_deg=math.degrees(angle_rad), **kw)


def hwp(angle_rad: float, arm: str = ARM_BOTH) -> OpticalElement:
    return _angled(ElementKind.HWP, angle_rad, arm=arm)


def qwp(angle_rad: float, arm: str = ARM_BOTH) -> OpticalElement:
    return _angled(ElementKind.QWP, angle_rad, arm=arm)


def pol_phase(phi_rad: float, arm: str = ARM_BOTH) -> OpticalElement:
    return _angled(ElementKind.POL_PHASE, phi_rad, arm=arm)


def oam_phase(phi_rad: float) -> OpticalElement:
    return _angled(ElementKind.OAM_PHASE, phi_rad)


def bs() -> OpticalElement:
    return OpticalElement(ElementKind.BS)


def psdp(angle_rad: float) -> OpticalElement:
    return _angled(ElementKind.PSDP, angle_rad)


def dove(angle_rad: float) -> OpticalElement:
    return _angled(ElementKind.DOVE, angle_rad)


def spiral(shift: int) -> OpticalElement:
    return OpticalElement(ElementKind.SPIRAL, shift=shift)


def mode_conv_pi(angle_rad: float = 0.0) -> OpticalElement:
    return _angled(ElementKind.MODE_CONV_PI, angle_rad)


def mode_conv_pi2(angle_rad: float = 0.0) -> OpticalElement:
    return _angled(ElementKind.MODE_CONV_PI2, angle_rad)


def pbs() -> OpticalElement:
    return OpticalElement(ElementKind.PBS)


def mode_sorter_parity() -> OpticalElement:
    return OpticalElement(ElementKind.MODE_SORTER_PARITY)


def eom(on: bool) -> OpticalElement:
    return OpticalElement(ElementKind.EOM, on=on)


def arm_phase(delta_rad: float, arm: str) -> OpticalElement:
    return _angled(ElementKind.ARM_PHASE, delta_rad, arm=arm)


def _exp_y(a: float) -> np.ndarray:
    return math.cos(a) * I2 - 1j * math.sin(a) * np.array([[0, -1j], [1j, 0]])


_QUARTER = np.diag([1.0, 1j])


def _hwp_matrix(t: float) -> np.ndarray:
    return _exp_y(2 * t) @ SIGMA_Z


def _qwp_matrix(t: float) -> np.ndarray:
    return _exp_y(t) @ _QUARTER @ _exp_y(-t)


def jones(element: OpticalElement, platform: Platform) -> np.ndarray:
    """Element matrix in its natural space: 2x2 for single-degree elements,
    4x4 for the polarisation-controlled prism."""
    if platform.kind not in _LEGAL[element.kind]:
        raise IllegalElementError(
            f"{element.kind.value} is not defined on platform {platform.kind.value}"
        )
    k, t = element.kind, element.angle_rad
    ell = platform.ell
    if k is ElementKind.HWP:
        return _hwp_matrix(t)
    if k is ElementKind.QWP:
        return _qwp_matrix(t)
    if k in (ElementKind.POL_PHASE, ElementKind.OAM_PHASE):
        return phase_gate(t)
    if k is ElementKind.BS:
        return HADAMARD.copy()
    if k is ElementKind.PSDP:
        out = np.eye(4, dtype=complex)
        out[2:, 2:] = SIGMA_X @ dagger(phase_gate(2 * ell * t))
        return out
    if k is ElementKind.DOVE:
        return phase_gate(2 * ell * t) @ SIGMA_X
    if k is ElementKind.MODE_CONV_PI:
        if abs(ell) != 1:
            raise IllegalElementError("mode converters act only on the |ell|=1 pair")
        return _hwp_matrix(t)
    if k is ElementKind.MODE_CONV_PI2:
        if abs(ell) != 1:
            raise IllegalElementError("mode converters act only on the |ell|=1 pair")
        return _qwp_matrix(t)
    if k is ElementKind.PBS:
        return I2.copy()  # routing only; matrix action is trivial
    if k is ElementKind.EOM:
        return SIGMA_X.copy() if element.on else I2.copy()
    if k is ElementKind.ARM_PHASE:
        out = I2.copy().astype(complex)
        out[int(element.arm), int(element.arm)] = np.exp(1j * t)
        return out
    raise IllegalElementError(f"{k.value} has no matrix on {platform.kind.value}")


# Which side of the controller (x) system tensor product each local element
# acts on, per platform.
_POL_SIDE = {
    PlatformKind.PATH_POL: "system",   # polarisation is the system
    PlatformKind.POL_OAM: "controller",
}


def _embed(element: OpticalElement, platform: Platform) -> np.ndarray:
    """Element matrix embedded in the controller (x) system 4x4 space."""
    M = jones(element, platform)
    if M.shape == (4, 4):
        return M
    k = element.kind
    if k in (ElementKind.HWP, ElementKind.QWP, ElementKind.POL_PHASE,
             ElementKind.EOM, ElementKind.PBS):
        side = _POL_SIDE[platform.kind]
    elif k in (ElementKind.OAM_PHASE, ElementKind.DOVE,
               ElementKind.MODE_CONV_PI, ElementKind.MODE_CONV_PI2):
        side = "system"
    elif k is ElementKind.BS:
        side = "controller"
    elif k is ElementKind.ARM_PHASE:
        return np.kron(M, I2)
    else:  # pragma: no cover
        raise IllegalElementError(k.value)
    if platform.kind is PlatformKind.PATH_POL and side == "system" and element.arm != ARM_BOTH:
        out = np.eye(4, dtype=complex)
        a = int(element.arm)
        out[2 * a:2 * a + 2, 2 * a:2 * a + 2] = M
        return out
    return np.kron(M, I2) if side == "controller" else np.kron(I2, M)


@dataclass(frozen=True)
class OpticalCircuit:
    platform: Platform
    elements: tuple

    def __post_init__(self):
        elems = tuple(self.elements)
        for e in elems:
            if self.platform.kind not in _LEGAL[e.kind]:
                raise IllegalElementError(
                    f"{e.kind.value} is not legal on {self.platform.kind.value}"
                )
            if self.platform.kind is PlatformKind.POL_OAM and e.arm != ARM_BOTH:
                raise IllegalElementError("arm tags only apply to the two-path platform")
        object.__setattr__(self, "elements", elems)

    def matrix(self) -> np.ndarray:
        U = np.eye(4, dtype=complex)
        for e in self.elements:
            U = _embed(e, self.platform) @ U
        return U

    def with_ell(self, ell: int) -> "OpticalCircuit":
        """Same element list evaluated on a different mode pair."""
        return replace(self, platform=Platform.pol_oam(ell))


def circuit_matrix(circuit: OpticalCircuit) -> np.ndarray:
    M = circuit.matrix()
    err = np.linalg.norm(dagger(M) @ M - np.eye(4))
    if err > 1e-9:
        raise ValueError(f"compiled circuit is not unitary: deviation {err:.3e}")
    return M


def simulate(circuit: OpticalCircuit, state: PureState) -> PureState:
    """Apply the circuit to a 4-dimensional controller (x) system state."""
    if state.dim != 4:
        raise DimensionError("circuit simulation expects a 4-dimensional state")
    return PureState(circuit_matrix(circuit) @ state.amplitudes)


@dataclass(frozen=True)
class VerifyReport:
    distance: float
    recovered_phase: float
    passed: bool
    tol: float


def verify(circuit: OpticalCircuit, target, tol: float = 1e-9) -> VerifyReport:
    """Global-phase-invariant distance between the compiled circuit and a target."""
    target = require_unitary(target, what="target unitary")
    M = circuit_matrix(circuit)
    if M.shape != target.shape:
        raise DimensionError("circuit and target dimensions differ")
    dist, phase = phase_align(M, target)
    return VerifyReport(dist, phase, dist <= tol, tol)


# ---------------------------------------------------------------------------
# Single-qubit decompositions
# ---------------------------------------------------------------------------

_TO_ZYZ = math.cos(math.pi / 4) * I2 - 1j * math.sin(math.pi / 4) * SIGMA_X


def _rotation_product(xi: float, eta: float, zeta: float) -> np.ndarray:
    return (
        _exp_y(xi / 2)
        @ np.diag([np.exp(1j * eta / 2), np.exp(-1j * eta / 2)])
        @ _exp_y(zeta / 2)
    )


def _snap_angle(x: float, period: float) -> float:
    x %= period
    if x > period - 1e-12:
        return 0.0
    return 0.0 if abs(x) < 1e-12 else x


def euler_decompose(U) -> tuple[float, float, float, float]:
    """Angles (xi, eta, zeta, global_phase) of the y-z-y rotation product.

    The reassembly e^{i phase} exp(-i xi sy/2) exp(i eta sz/2) exp(-i zeta sy/2)
    reproduces the input exactly.  At the rotation locks (middle angle 0 or pi
    modulo 2 pi) only one outer angle is defined; the convention here is
    zeta = 0.  Ranges: xi, zeta in [0, 2 pi), eta in [0, 4 pi).
    """
    U = require_unitary(U, what="2x2 unitary")
    if U.shape != (2, 2):
        raise DimensionError("euler_decompose expects a 2x2 matrix")
    phase = float(np.angle(np.linalg.det(U))) / 2.0
    V = np.exp(-1j * phase) * U
    Vp = _TO_ZYZ @ V @ dagger(_TO_ZYZ)
    a, b = complex(Vp[0, 0]), complex(Vp[1, 0])
    eta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(a) > 1e-9 and abs(b) > 1e-9:
        total = -2.0 * float(np.angle(a))
        diff = 2.0 * float(np.angle(b))
        xi, zeta = (total + diff) / 2.0, (total - diff) / 2.0
    elif abs(b) <= 1e-9:
        xi, zeta = -2.0 * float(np.angle(a)), 0.0
    else:
        xi, zeta = 2.0 * float(np.angle(b)), 0.0
    xi = _snap_angle(xi, 2 * math.pi)
    zeta = _snap_angle(zeta, 2 * math.pi)
    eta = _snap_angle(eta, 4 * math.pi)
    W = _rotation_product(xi, eta, zeta)
    if np.linalg.norm(W - V) > np.linalg.norm(W + V):
        eta = _snap_angle(eta + 2 * math.pi, 4 * math.pi)
        if eta == 0.0:
            eta = 2 * math.pi
    return xi, eta, zeta, phase


def qqh(xi: float, eta: float, zeta: float) -> list[OpticalElement]:
    """Quarter/half/quarter-wave-plate gadget for the y-z-y rotation product.

    Elements are returned in application order; their matrix product equals
    the rotation product exactly (including phase):

        QWP(pi/4 + xi/2) . HWP(pi/4 + (xi - eta - zeta)/4) . QWP(pi/4 - zeta/2)
    """
    return [
        qwp(math.pi / 4 - zeta / 2),
        hwp(math.pi / 4 + (xi - eta - zeta) / 4),
        qwp(math.pi / 4 + xi / 2),
    ]


def reorder_qh(qwp_angle: float, hwp_angle: float) -> tuple[float, float]:
    """Swap a quarter plate past a half plate: Q(a) H(b) = H(b) Q(2b - a)."""
    return hwp_angle, 2.0 * hwp_angle - qwp_angle


def waveplate_sandwich(alpha: float, lam: float) -> list[OpticalElement]:
    """Three-plate realization of HWP(alpha/2) . P(lam/2) . Hadamard.

    Application order; the product is exact including phase:

        QWP(alpha + pi/4) . HWP(3 pi/8 + (2 alpha - lam)/4) . QWP(pi/2)
    """
    return [
        qwp(math.pi / 2),
        hwp(3 * math.pi / 8 + (2 * alpha - lam) / 4),
        qwp(alpha + math.pi / 4),
    ]


# ---------------------------------------------------------------------------
# Local-transform compilers
# ---------------------------------------------------------------------------

def _is_identity(M: np.ndarray, tol: float = 1e-12) -> bool:
    return np.linalg.norm(M - np.eye(M.shape[0])) <= tol


def _global_phase_of_identity(M: np.ndarray, tol: float = 1e-12) -> float | None:
    """Phase mu with M = e^{i mu} I, or None."""
    z = M[0, 0]
    if abs(abs(z) - 1.0) <= tol and np.linalg.norm(M - z * np.eye(M.shape[0])) <= tol:
        return float(np.angle(z))
    return None


def _pol_stack(M, arm: str = ARM_BOTH) -> tuple[list[OpticalElement], float]:
    """Wave plates realizing a polarisation unitary.

    Returns (elements, residual_phase): the element product times
    e^{i residual_phase} equals M exactly.
    """
    mu = _global_phase_of_identity(M)
    if mu is not None:
        return [], mu
    xi, eta, zeta, phase = euler_decompose(M)
    elems = [replace(e, arm=arm) for e in qqh(xi, eta, zeta)]
    return elems, phase


def _diag_phases(M: np.ndarray) -> tuple[float, float] | None:
    if abs(M[0, 1]) > 1e-12 or abs(M[1, 0]) > 1e-12:
        return None
    return float(np.angle(M[0, 0])), float(np.angle(M[1, 1]))


def _antidiag_phases(M: np.ndarray) -> tuple[float, float] | None:
    if abs(M[0, 0]) > 1e-12 or abs(M[1, 1]) > 1e-12:
        return None
    return float(np.angle(M[0, 1])), float(np.angle(M[1, 0]))


def _oam_stack(M, ell: int) -> list[OpticalElement]:
    """Elements realizing a mode-pair unitary, up to a global phase.

    Diagonal transforms compile to a coaxial prism pair, exchange-type
    (antidiagonal) transforms to a single rotated prism, both valid for any
    mode index.  Anything else needs the cylindrical-lens converters, which
    exist only for the |ell| = 1 pair.
    """
    if _global_phase_of_identity(M) is not None:
        return []
    d = _diag_phases(M)
    if d is not None:
        # M = e^{i mu} P(phi); P(phi) = DOVE(0) after DOVE(-phi/(2 ell))
        phi = (d[0] - d[1]) / 2.0
        return [dove(-phi / (2 * ell)), dove(0.0)]
    ad = _antidiag_phases(M)
    if ad is not None:
        # M = e^{i mu} P(phi) sigma_x with phi = (arg M01 - arg M10)/2... via
        # DOVE(a) = P(2 ell a) sigma_x: match upper-right e^{i 2 ell a}.
        phi = (ad[0] - ad[1]) / 2.0
        return [dove(phi / (2 * ell))]
    if abs(ell) != 1:
        raise NotImplementableError(
            f"general mode-pair transform not realizable for |ell| = {abs(ell)}; "
            "only phase and exchange transforms have prism realizations"
        )
    xi, eta, zeta, _ = euler_decompose(M)
    plates = qqh(xi, eta, zeta)
    kinds = {ElementKind.QWP: mode_conv_pi2, ElementKind.HWP: mode_conv_pi}
    return [kinds[e.kind](e.angle_rad) for e in plates]


def compile_controlled_phase(theta1: float, theta2: float, ell: int) -> list[OpticalElement]:
    """Elements for the polarisation-controlled phase 1 (+) diag(e^{i t1}, e^{i t2}).

    The controlled phase symmetrizes into a polarisation phase shift and two
    coaxial prisms; the product equals the target up to one global phase.
    """
    if ell == 0:
        raise ValueError("mode index must be nonzero")
    t1p = (theta1 + theta2) / 4.0
    t2p = (theta1 - theta2) / 2.0
    elems: list[OpticalElement] = []
    if abs(t1p) > 1e-14:
        elems.append(pol_phase(-t1p))
    elems.append(psdp(-t2p / (2 * ell)))
    elems.append(psdp(0.0))
    return elems


def _controlled_stack(A, ell: int) -> list[OpticalElement]:
    """Elements for the polarisation-controlled transform 1 (+) A on the mode
    pair, up to a global phase."""
    A = require_unitary(A, what="controlled transform")
    if _is_identity(A):
        return []
    d = _diag_phases(A)
    if d is not None:
        return compile_controlled_phase(d[0], d[1], ell)
    ad = _antidiag_phases(A)
    if ad is not None:
        # A = e^{2 i phi} sigma_x P(theta)^dag: split off the polarisation
        # phase, keep a single rotated prism.
        phi = (ad[0] + ad[1]) / 4.0
        theta = (ad[0] - ad[1]) / 2.0
        elems: list[OpticalElement] = []
        if abs(phi) > 1e-14:
            elems.append(pol_phase(-phi))
        elems.append(psdp(theta / (2 * ell)))
        return elems
    # General: diagonalize A = W Phi W^dag and conjugate a controlled phase.
    evals, vecs = np.linalg.eig(A)
    v0 = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    v1 = vecs[:, 1] - v0 * np.vdot(v0, vecs[:, 1])
    v1 /= np.linalg.norm(v1)
    W = np.column_stack([v0, v1])
    inner = _controlled_stack(np.diag(evals), ell)
    return _oam_stack(dagger(W), ell) + inner + _oam_stack(W, ell)


# ---------------------------------------------------------------------------
# Circuit compilers
# ---------------------------------------------------------------------------

def compile_pol_oam(factors: CSFactors, ell: int) -> OpticalCircuit:
    """Compile a qubit-qubit factor bundle for the single-beam platform.

    Realizes, in application order,

        (1 x right^dag) C_X (H x 1) C_{core^dag^2} (H x left.core) C_{ll.left^dag}

    where X = -i lower_right^dag right vanishes in the gauge-fixed case.
    The compiled matrix equals the reconstructed unitary up to a global phase.
    """
    if factors.n != 2:
        raise DimensionError("single-beam compilation expects qubit-qubit factors")
    if ell == 0:
        raise ValueError("mode index must be nonzero")
    th = factors.thetas

    def stack(role, fn, M):
        try:
            return fn(M, ell)
        except NotImplementableError as exc:
            raise NotImplementableError(
                f"{role} factor is {exc}; offending transform:\n{np.round(M, 6)}"
            ) from None

    elems: list[OpticalElement] = []
    elems += stack("input-side corner", _oam_stack, dagger(factors.right))
    X = -1j * dagger(factors.effective_lower_right()) @ factors.right
    elems += stack("input-side conditional", _controlled_stack, X)
    elems.append(hwp(math.pi / 8))
    elems += compile_controlled_phase(-2 * th[0], -2 * th[1], ell)
    elems.append(hwp(math.pi / 8))
    elems += stack("core-side local", _oam_stack, factors.left @ factors.phase_core)
    elems += stack(
        "output-side conditional", _controlled_stack,
        factors.lower_left @ dagger(factors.left),
    )
    return OpticalCircuit(Platform.pol_oam(ell), tuple(elems))


def compile_path_pol(factors: CSFactors) -> OpticalCircuit:
    """Compile a qubit-qubit factor bundle as a two-path interferometer.

    Per-arm wave-plate stacks realize the four corner unitaries and the
    conditional phase cores; two balanced beam splitters realize the path
    mixing.  Residual stack phases are carried by per-arm path-length trims
    so the compiled matrix reproduces the reconstructed unitary exactly.
    """
    if factors.n != 2:
        raise DimensionError("interferometer compilation expects qubit-qubit factors")
    core = factors.phase_core

    def conditional(M0, M1) -> list[OpticalElement]:
        out: list[OpticalElement] = []
        for arm, M in (("0", M0), ("1", M1)):
            stack, phase = _pol_stack(M, arm=arm)
            out += stack
            if abs(phase) > 1e-14:
                out.append(arm_phase(phase, arm))
        return out

    elems: list[OpticalElement] = []
    elems += conditional(
        dagger(factors.right), -1j * dagger(factors.effective_lower_right())
    )
    elems.append(bs())
    elems += conditional(core, dagger(core))
    elems.append(bs())
    elems += conditional(factors.left, factors.lower_left)
    return OpticalCircuit(Platform.path_pol(), tuple(elems))


# ---------------------------------------------------------------------------
# Worked-scheme layouts
# ---------------------------------------------------------------------------

def basic_circuit(ell: int, target: PureState | None = None) -> OpticalCircuit:
    """Single-shot preparation circuit on the single-beam platform.

    For the default target (the lower mode of the pair) the layout is one
    rotated prism conditional, a coaxial prism pair, a coaxial image-rotator
    pair, and two polarisation stacks.  Other targets additionally conjugate
    by a mode-pair rotation, which restricts them to |ell| = 1.
    """
    elems: list[OpticalElement] = [
        hwp(math.pi / 8),
        dove(math.pi / (8 * ell)),
        dove(0.0),
        psdp(-math.pi / (4 * ell)),
        psdp(0.0),
        qwp(math.pi / 2),
        hwp(math.pi / 8),
        qwp(0.0),
        psdp(math.pi / (4 * ell)),
    ]
    if target is not None:
        t = target.amplitudes
        if abs(t[0] - 1.0) > 1e-12 or abs(t[1]) > 1e-12:
            from .schemes import canonical_perp

            V = np.column_stack([t, canonical_perp(target).amplitudes])
            elems = _oam_stack(dagger(V), ell) + elems + _oam_stack(V, ell)
    return OpticalCircuit(Platform.pol_oam(ell), tuple(elems))


def weak_swap_circuit(lam: float, ell: int) -> OpticalCircuit:
    """Partial-exchange coupling between polarisation and a mode pair.

    Prism rotation angle lam/(2 ell); at lam = pi/2 (rotation pi/(4 ell)) the
    circuit performs a full state exchange in one pass, and the same hardware
    acts as the exchange on every mode pair with index (4n+1) ell.
    """
    return OpticalCircuit(
        Platform.pol_oam(ell),
        (
            psdp(0.0),
            hwp(math.pi / 8),
            pol_phase(-lam / 2),
            psdp(lam / (2 * ell)),
            psdp(0.0),
            hwp(math.pi / 8),
            psdp(0.0),
        ),
    )


def target_dep_circuit(lam: float, ell: int) -> OpticalCircuit:
    """Coupling that drives every mode pair toward its balanced superposition.

    Identical to the partial-exchange layout minus the polarisation phase
    shift, so one fixed setup at prism angle a implements the coupling with
    strength 2 a ell on the pair with index ell.
    """
    return OpticalCircuit(
        Platform.pol_oam(ell),
        (
            psdp(0.0),
            hwp(math.pi / 8),
            psdp(lam / (2 * ell)),
            psdp(0.0),
            hwp(math.pi / 8),
            psdp(0.0),
        ),
    )
