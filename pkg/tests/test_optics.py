import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optfeedback.channels import PureState
from optfeedback.csdecomp import cs_decompose, kraus_svd, reconstruct
from optfeedback.linalg import (
    HADAMARD,
    I2,
    SIGMA_X,
    SIGMA_Z,
    SWAP4,
    dagger,
    haar_unitary,
    phase_distance,
    phase_gate,
)
from optfeedback.optics import (
    ElementKind,
    IllegalElementError,
    NotImplementableError,
    OpticalCircuit,
    Platform,
    basic_circuit,
    bs,
    compile_controlled_phase,
    compile_path_pol,
    compile_pol_oam,
    dove,
    eom,
    euler_decompose,
    hwp,
    jones,
    pol_phase,
    psdp,
    qqh,
    qwp,
    reorder_qh,
    simulate,
    spiral,
    target_dep_circuit,
    verify,
    waveplate_sandwich,
    weak_swap_circuit,
)

POL_OAM_1 = Platform.pol_oam(1)
PATH_POL = Platform.path_pol()


def elements_product(elements, platform=POL_OAM_1):
    """Matrix product of 2x2 element matrices, first applied first."""
    M = np.eye(2, dtype=complex)
    for e in elements:
        M = jones(e, platform) @ M
    return M


def rotation_product(xi, eta, zeta):
    ry = lambda a: np.array(
        [[math.cos(a / 2), -math.sin(a / 2)], [math.sin(a / 2), math.cos(a / 2)]],
        dtype=complex,
    )
    return ry(xi) @ np.diag([np.exp(1j * eta / 2), np.exp(-1j * eta / 2)]) @ ry(zeta)


class TestJones:
    def test_hwp_zero_is_sigma_z(self):
        np.testing.assert_allclose(jones(hwp(0.0), POL_OAM_1), SIGMA_Z, atol=1e-15)

    def test_hwp_pi8_is_hadamard(self):
        np.testing.assert_allclose(jones(hwp(math.pi / 8), POL_OAM_1), HADAMARD, atol=1e-15)

    def test_psdp_zero_is_cnot(self):
        expected = np.eye(4, dtype=complex)
        expected[2:, 2:] = SIGMA_X
        for ell in (1, 2, 5):
            np.testing.assert_allclose(
                jones(psdp(0.0), Platform.pol_oam(ell)), expected, atol=1e-15
            )

    def test_psdp_quarter_rotation(self):
        for ell in (1, 2, 3):
            got = jones(psdp(math.pi / (4 * ell)), Platform.pol_oam(ell))
            expected = np.eye(4, dtype=complex)
            expected[2:, 2:] = SIGMA_X @ dagger(phase_gate(math.pi / 2))
            np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_dove_action(self):
        for ell in (1, 3):
            got = jones(dove(0.2), Platform.pol_oam(ell))
            np.testing.assert_allclose(got, phase_gate(2 * ell * 0.2) @ SIGMA_X, atol=1e-12)

    def test_all_unitary(self, rng):
        elems = [hwp(0.7), qwp(1.3), pol_phase(2.1), psdp(0.5), dove(0.9)]
        for e in elems:
            M = jones(e, POL_OAM_1)
            assert np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0])) < 1e-12

    def test_platform_legality(self):
        with pytest.raises(IllegalElementError):
            jones(psdp(0.1), PATH_POL)
        with pytest.raises(IllegalElementError):
            jones(bs(), POL_OAM_1)
        with pytest.raises(IllegalElementError):
            jones(spiral(1), POL_OAM_1)  # ancilla bookkeeping only


class TestEulerDecompose:
    def test_identity(self):
        assert euler_decompose(I2) == (0.0, 0.0, 0.0, 0.0)

    def test_pure_z_rotation(self):
        U = np.diag([np.exp(1j * math.pi / 4), np.exp(-1j * math.pi / 4)])
        xi, eta, zeta, phase = euler_decompose(U)
        assert (xi, zeta, phase) == (0.0, 0.0, 0.0)
        assert eta == pytest.approx(math.pi / 2, abs=1e-12)

    def test_hadamard_reassembly(self):
        xi, eta, zeta, phase = euler_decompose(HADAMARD)
        W = np.exp(1j * phase) * rotation_product(xi, eta, zeta)
        np.testing.assert_allclose(W, HADAMARD, atol=1e-10)

    def test_random_reassembly(self, rng):
        for _ in range(200):
            U = haar_unitary(2, rng)
            xi, eta, zeta, phase = euler_decompose(U)
            assert 0 <= xi < 2 * math.pi and 0 <= zeta < 2 * math.pi
            assert 0 <= eta < 4 * math.pi
            W = np.exp(1j * phase) * rotation_product(xi, eta, zeta)
            assert np.linalg.norm(W - U) < 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            euler_decompose(np.array([[1.0, 0.1], [0.0, 1.0]]))


class TestPlateGadgets:
    def test_qqh_zero_angles(self):
        elems = qqh(0.0, 0.0, 0.0)
        assert [e.kind for e in elems] == [ElementKind.QWP, ElementKind.HWP, ElementKind.QWP]
        assert elems[0].angle_deg == elems[2].angle_deg == 45.0
        np.testing.assert_allclose(elements_product(elems), I2, atol=1e-12)

    def test_qqh_hadamard(self):
        xi, eta, zeta, _ = euler_decompose(HADAMARD)
        assert phase_distance(elements_product(qqh(xi, eta, zeta)), HADAMARD) < 1e-9

    def test_qqh_random_sweep(self, rng):
        for _ in range(200):
            U = haar_unitary(2, rng)
            xi, eta, zeta, phase = euler_decompose(U)
            prod = elements_product(qqh(xi, eta, zeta))
            assert phase_distance(prod, U) < 1e-9
            # the gadget reproduces the rotation product exactly, phase included
            assert np.linalg.norm(prod - rotation_product(xi, eta, zeta)) < 1e-10

    def test_reorder_trivial(self):
        assert reorder_qh(0.0, 0.0) == (0.0, 0.0)

    def test_reorder_specific(self):
        h, q2 = reorder_qh(0.2, 0.5)
        assert (h, q2) == (0.5, 0.8)
        lhs = elements_product([hwp(0.5), qwp(0.2)])   # matrix order Q(0.2) H(0.5)
        rhs = elements_product([qwp(0.8), hwp(0.5)])
        assert np.linalg.norm(lhs - rhs) < 1e-10

    @settings(max_examples=100, deadline=None)
    @given(
        a=st.floats(min_value=-6.0, max_value=6.0),
        b=st.floats(min_value=-6.0, max_value=6.0),
    )
    def test_reorder_property(self, a, b):
        h, q2 = reorder_qh(a, b)
        lhs = jones(qwp(a), POL_OAM_1) @ jones(hwp(b), POL_OAM_1)
        rhs = jones(hwp(h), POL_OAM_1) @ jones(qwp(q2), POL_OAM_1)
        assert phase_distance(lhs, rhs) < 1e-10

    def test_sandwich_zero(self):
        elems = waveplate_sandwich(0.0, 0.0)
        target = jones(hwp(0.0), POL_OAM_1) @ HADAMARD
        assert phase_distance(elements_product(elems), target) < 1e-9

    def test_sandwich_specific(self):
        alpha, lam = 0.6, 0.9
        elems = waveplate_sandwich(alpha, lam)
        target = jones(hwp(alpha / 2), POL_OAM_1) @ phase_gate(lam / 2) @ HADAMARD
        assert np.linalg.norm(elements_product(elems) - target) < 1e-9

    def test_sandwich_sweep(self, rng):
        for _ in range(100):
            alpha, lam = rng.uniform(-2 * math.pi, 2 * math.pi, 2)
            target = jones(hwp(alpha / 2), POL_OAM_1) @ phase_gate(lam / 2) @ HADAMARD
            assert phase_distance(elements_product(waveplate_sandwich(alpha, lam)), target) < 1e-9

    def test_sandwich_matches_exchange_figure_angle(self):
        # the plate angle quoted for the exchange layout, gamma =
        # (2a + l)/4 - pi/8, is the half-wave angle of the sandwich for the
        # conjugated phase: HWP(a/2) P(l/2)^dag Hadamard
        alpha, lam = 0.8, 1.1
        elems = waveplate_sandwich(alpha, -lam)
        gamma = (2 * alpha + lam) / 4 - math.pi / 8
        hwp_angle = math.radians(elems[1].angle_deg)
        # angles agree modulo pi/2 (a half-wave plate flips sign every pi/2)
        assert math.cos(4 * (hwp_angle - gamma)) == pytest.approx(1.0, abs=1e-12)
        target = jones(hwp(alpha / 2), POL_OAM_1) @ dagger(phase_gate(lam / 2)) @ HADAMARD
        assert phase_distance(elements_product(elems), target) < 1e-9


class TestControlledPhase:
    def embed(self, theta1, theta2):
        out = np.eye(4, dtype=complex)
        out[2:, 2:] = np.diag([np.exp(1j * theta1), np.exp(1j * theta2)])
        return out

    def circuit_product(self, elems, ell):
        M = np.eye(4, dtype=complex)
        return OpticalCircuit(Platform.pol_oam(ell), tuple(elems)).matrix()

    def test_zero_is_identity(self):
        elems = compile_controlled_phase(0.0, 0.0, 1)
        assert phase_distance(self.circuit_product(elems, 1), np.eye(4)) < 1e-12

    def test_symmetric_pair_two_prisms(self):
        elems = compile_controlled_phase(math.pi / 2, -math.pi / 2, 1)
        assert [e.kind for e in elems] == [ElementKind.PSDP, ElementKind.PSDP]
        assert phase_distance(
            self.circuit_product(elems, 1), self.embed(math.pi / 2, -math.pi / 2)
        ) < 1e-12

    def test_random_sweep(self, rng):
        for ell in (1, 2, 3):
            for _ in range(34):
                t1, t2 = rng.uniform(-math.pi, math.pi, 2)
                elems = compile_controlled_phase(t1, t2, ell)
                assert phase_distance(self.circuit_product(elems, ell), self.embed(t1, t2)) < 1e-9

    def test_rejects_zero_index(self):
        with pytest.raises(ValueError):
            compile_controlled_phase(0.1, 0.2, 0)


class TestCompilePolOam:
    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_scheme_factors_compile(self, ell):
        from optfeedback.schemes import basic_scheme, target_dep_scheme, weak_swap

        for scheme in (
            basic_scheme(PureState(np.array([1.0, 0.0]))),
            weak_swap(0.6),
            target_dep_scheme(0.9),
        ):
            circuit = compile_pol_oam(scheme.factors, ell)
            assert verify(circuit, scheme.unitary).passed

    def test_random_factors_need_unit_index(self, rng):
        from conftest import random_kraus_pair

        k0, k1 = random_kraus_pair(rng)
        factors = kraus_svd(k0, k1)
        circuit = compile_pol_oam(factors, 1)
        assert verify(circuit, reconstruct(factors)).passed
        with pytest.raises(NotImplementableError):
            compile_pol_oam(factors, 2)


class TestCompilePathPol:
    def test_identity_factors(self):
        factors = cs_decompose(np.eye(4), 2)
        circuit = compile_path_pol(factors)
        kinds = [e.kind for e in circuit.elements]
        assert kinds.count(ElementKind.BS) == 2
        assert not any(k in (ElementKind.QWP, ElementKind.HWP) for k in kinds)
        assert phase_distance(circuit.matrix(), np.eye(4)) < 1e-10

    def test_basic_scheme(self):
        from optfeedback.schemes import basic_scheme

        scheme = basic_scheme(PureState(np.array([1.0, 0.0])))
        circuit = compile_path_pol(scheme.factors)
        assert verify(circuit, scheme.unitary).passed

    def test_random_pairs_end_to_end(self, rng):
        from conftest import random_kraus_pair

        for _ in range(30):
            k0, k1 = random_kraus_pair(rng)
            factors = kraus_svd(k0, k1)
            circuit = compile_path_pol(factors)
            report = verify(circuit, reconstruct(factors))
            assert report.passed, report


class TestSimulateVerify:
    def test_empty_circuit(self, rand_state):
        state = PureState(rand_state(4))
        circuit = OpticalCircuit(POL_OAM_1, ())
        np.testing.assert_allclose(simulate(circuit, state).amplitudes, state.amplitudes)

    def test_cnot_action(self):
        # horizontal polarisation flips the mode: |H>|-l> -> |H>|+l>
        circuit = OpticalCircuit(POL_OAM_1, (psdp(0.0),))
        state = PureState(np.array([0, 0, 1, 0], dtype=complex))
        out = simulate(circuit, state)
        np.testing.assert_allclose(out.amplitudes, [0, 0, 0, 1], atol=1e-12)

    def test_exchange_transfers_polarisation(self, rng):
        for ell in (1, 2):
            circuit = weak_swap_circuit(math.pi / 2, ell)
            chi = haar_unitary(2, rng)[:, 0]
            state = PureState(np.kron(chi, np.array([1.0, 0.0])))
            amp = simulate(circuit, state).amplitudes.reshape(2, 2)
            rho_sys = amp.T @ amp.conj()  # trace out the polarisation controller
            fid = float(np.real(chi.conj() @ rho_sys @ chi))
            assert fid == pytest.approx(1.0, abs=1e-10)

    def test_verify_self(self, rng):
        circuit = weak_swap_circuit(0.8, 1)
        U = circuit.matrix()
        report = verify(circuit, U)
        assert report.passed and report.distance < 1e-12

    def test_verify_detects_perturbation(self):
        lam = 0.8
        good = weak_swap_circuit(lam, 1)
        U = math.cos(lam) * np.eye(4) - 1j * math.sin(lam) * SWAP4
        elems = list(good.elements)
        idx = next(i for i, e in enumerate(elems) if e.kind is ElementKind.HWP)
        elems[idx] = hwp(elems[idx].angle_rad + 0.1)
        bad = OpticalCircuit(POL_OAM_1, tuple(elems))
        report = verify(bad, U)
        assert not report.passed and report.distance > 1e-3

    def test_identity_circuit_vs_identity(self):
        report = verify(OpticalCircuit(POL_OAM_1, ()), np.eye(4))
        assert report.distance == 0.0


class TestSchemeCircuits:
    @pytest.mark.parametrize("ell", [1, 2, 3])
    @pytest.mark.parametrize("lam", [0.2, 0.9, math.pi / 2, 2.4])
    def test_weak_swap_layouts(self, lam, ell):
        U = math.cos(lam) * np.eye(4) - 1j * math.sin(lam) * SWAP4
        assert verify(weak_swap_circuit(lam, ell), U).passed

    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_target_dep_layouts(self, ell):
        from optfeedback.schemes import target_dep_scheme

        lam = 0.7
        scheme = target_dep_scheme(lam)
        assert verify(target_dep_circuit(lam, ell), scheme.unitary).passed

    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_basic_layout(self, ell):
        from optfeedback.schemes import basic_scheme

        scheme = basic_scheme(PureState(np.array([1.0, 0.0])))
        circuit = basic_circuit(ell)
        assert verify(circuit, scheme.unitary).passed
        kinds = [e.kind for e in circuit.elements]
        assert kinds.count(ElementKind.PSDP) == 3
        assert kinds.count(ElementKind.DOVE) == 2

    def test_basic_layout_general_target_unit_index(self):
        from optfeedback.schemes import basic_scheme

        t = PureState(np.array([0.6, 0.8j]))
        scheme = basic_scheme(t)
        assert verify(basic_circuit(1, target=t), scheme.unitary).passed
        with pytest.raises(NotImplementableError):
            basic_circuit(2, target=t)

    def test_quoted_plate_stack_for_conjugated_hadamard(self):
        # beam-order reading of the quoted triple Q(pi/2), H(pi/8), Q(0)
        # realizes P(pi/4)^dag Hadamard P(pi/4)
        target = dagger(phase_gate(math.pi / 4)) @ HADAMARD @ phase_gate(math.pi / 4)
        stack = elements_product([qwp(math.pi / 2), hwp(math.pi / 8), qwp(0.0)])
        assert phase_distance(stack, target) < 1e-12

    def test_prism_pair_realizes_quarter_phase(self):
        # coaxial pair, one rotated by pi/(8 ell): phase P(pi/4)^dag on the pair
        for ell in (1, 2, 3):
            p = Platform.pol_oam(ell)
            got = jones(dove(0.0), p) @ jones(dove(math.pi / (8 * ell)), p)
            np.testing.assert_allclose(got, dagger(phase_gate(math.pi / 4)), atol=1e-12)

    def test_aliasing_same_hardware_higher_pair(self):
        # built for ell = 1 at the full-exchange angle, the identical element
        # list acts as the exchange on the (4n+1)-indexed pairs
        circuit = weak_swap_circuit(math.pi / 2, 1)
        U = math.cos(math.pi / 2) * np.eye(4) - 1j * math.sin(math.pi / 2) * SWAP4
        assert verify(circuit.with_ell(5), U).passed
        assert verify(circuit.with_ell(-3), U).passed
        assert not verify(circuit.with_ell(2), U).passed


class TestEomPbs:
    def test_eom_states(self):
        assert np.allclose(jones(eom(True), POL_OAM_1), SIGMA_X)
        assert np.allclose(jones(eom(False), POL_OAM_1), I2)


class TestNegativeModeIndex:
    def test_compiles_on_negative_pairs(self):
        from optfeedback.schemes import weak_swap

        s = weak_swap(0.7)
        for ell in (-1, -2):
            assert verify(weak_swap_circuit(0.7, ell), s.unitary).passed
            assert verify(compile_pol_oam(s.factors, ell), s.unitary).passed

    def test_controlled_phase_negative_index(self, rng):
        for _ in range(10):
            t1, t2 = rng.uniform(-math.pi, math.pi, 2)
            elems = compile_controlled_phase(t1, t2, -2)
            M = OpticalCircuit(Platform.pol_oam(-2), tuple(elems)).matrix()
            target = np.eye(4, dtype=complex)
            target[2:, 2:] = np.diag([np.exp(1j * t1), np.exp(1j * t2)])
            assert phase_distance(M, target) < 1e-9


class TestJonesUnitaritySweep:
    def test_every_kind_every_legal_platform(self, rng):
        from optfeedback.optics import (
            arm_phase, mode_conv_pi, mode_conv_pi2, oam_phase, pbs,
        )

        angle = float(rng.uniform(0, 2 * math.pi))
        catalogue = [
            (hwp(angle), [PATH_POL, POL_OAM_1]),
            (qwp(angle), [PATH_POL, POL_OAM_1]),
            (pol_phase(angle), [PATH_POL, POL_OAM_1]),
            (oam_phase(angle), [POL_OAM_1]),
            (bs(), [PATH_POL]),
            (psdp(angle), [POL_OAM_1, Platform.pol_oam(-3)]),
            (dove(angle), [POL_OAM_1, Platform.pol_oam(4)]),
            (mode_conv_pi(angle), [POL_OAM_1]),
            (mode_conv_pi2(angle), [POL_OAM_1]),
            (pbs(), [PATH_POL, POL_OAM_1]),
            (eom(True), [PATH_POL, POL_OAM_1]),
            (eom(False), [PATH_POL, POL_OAM_1]),
            (arm_phase(angle, "1"), [PATH_POL]),
        ]
        for element, platforms in catalogue:
            for p in platforms:
                M = jones(element, p)
                assert np.linalg.norm(dagger(M) @ M - np.eye(M.shape[0])) < 1e-12


class TestLayoutRelation:
    def test_target_dep_is_exchange_minus_pol_phase(self):
        lam, ell = 0.83, 2
        ws = weak_swap_circuit(lam, ell).elements
        td = target_dep_circuit(lam, ell).elements
        stripped = tuple(e for e in ws if e.kind is not ElementKind.POL_PHASE)
        assert stripped == td
        assert len(ws) == len(td) + 1
