import math

import numpy as np
import pytest

from hamiltonian.fermion_hamiltonian import DeterminantSpec, determinant_from_notation
from quantum import statevector_engine as sv
from quantum.state_prep import (
    DiradicalSpec,
    SuperpositionSpec,
    build_controlled_pr,
    build_pr_circuit,
    circuit_unitary,
    diradical_character,
    excitation_operator,
    inverse_circuit,
    pr_unitary,
    spin_adapted_single,
    two_config_state,
)
from utils import QpdeInputError


def _prepared(spec: SuperpositionSpec) -> np.ndarray:
    return pr_unitary(spec)[:, 0]


class TestSuperpositionSpec:
    def test_rejects_unnormalized(self):
        det_a, det_b = determinant_from_notation("20"), determinant_from_notation("02")
        with pytest.raises(QpdeInputError):
            SuperpositionSpec(((det_a, 0.8), (det_b, 0.5)))

    def test_rejects_mixed_electron_counts(self):
        with pytest.raises(QpdeInputError):
            SuperpositionSpec(((determinant_from_notation("20"), 0.6), (determinant_from_notation("a0"), 0.8)))

    def test_rejects_three_entries(self):
        dets = [determinant_from_notation(s) for s in ("20", "02", "ab")]
        with pytest.raises(QpdeInputError):
            SuperpositionSpec(tuple((d, 1 / math.sqrt(3)) for d in dets))

    def test_canonical_flips_global_sign(self):
        det_a, det_b = determinant_from_notation("20"), determinant_from_notation("02")
        spec = SuperpositionSpec(((det_a, -0.6), (det_b, 0.8))).canonical()
        assert [c for _, c in spec.entries] == [0.6, -0.8]


class TestPrCircuit:
    @pytest.mark.parametrize("notation", ["20", "aa", "ab", "2000", "a0b0"])
    def test_single_determinant(self, notation):
        det = determinant_from_notation(notation)
        gates = build_pr_circuit(SuperpositionSpec.single(det))
        assert {g.name for g in gates} <= {"X"}
        state = _prepared(SuperpositionSpec.single(det))
        assert abs(state[det.basis_index()]) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "first, second, c_first",
        [("20", "02", 0.9), ("2000", "0200", 0.3), ("ab", "ba", 1 / math.sqrt(2)), ("2a0", "a20", -0.6)],
    )
    def test_two_determinants_match_statevector(self, first, second, c_first):
        c_second = -math.sqrt(1 - c_first**2)
        spec = SuperpositionSpec(
            ((determinant_from_notation(first), c_first), (determinant_from_notation(second), c_second))
        )
        np.testing.assert_allclose(_prepared(spec), spec.canonical().statevector(), atol=1e-12)

    def test_zero_coefficient_is_dropped(self):
        det_a, det_b = determinant_from_notation("20"), determinant_from_notation("02")
        gates = build_pr_circuit(SuperpositionSpec(((det_a, 0.0), (det_b, 1.0))))
        assert [g.target for g in gates] == [2, 3]

    def test_inverse_circuit_returns_to_vacuum(self):
        spec = two_config_state(0.3, determinant_from_notation("20"), determinant_from_notation("02"))
        gates = build_pr_circuit(spec)
        u = circuit_unitary(gates + inverse_circuit(gates), 4)
        np.testing.assert_allclose(u, np.eye(16), atol=1e-12)


class TestDiradical:
    def test_character_limits(self):
        assert diradical_character(0.0) == pytest.approx(0.0)
        assert diradical_character(1.0) == pytest.approx(1.0)
        assert 0.0 < diradical_character(0.3) < 1.0

    def test_spec_consistency(self):
        y = diradical_character(0.2)
        assert DiradicalSpec(n_luno=0.2).value == pytest.approx(y)
        with pytest.raises(QpdeInputError):
            DiradicalSpec(n_luno=0.2, y=y + 0.1)
        with pytest.raises(QpdeInputError):
            DiradicalSpec()

    def test_two_config_coefficients(self):
        spec = two_config_state(0.1, determinant_from_notation("20"), determinant_from_notation("02"))
        (_, c_homo), (_, c_lumo) = spec.entries
        assert c_homo == pytest.approx(math.sqrt(0.95))
        assert c_lumo == pytest.approx(-math.sqrt(0.05))

    def test_two_config_needs_double_replacement(self):
        with pytest.raises(QpdeInputError):
            two_config_state(0.1, determinant_from_notation("20"), determinant_from_notation("ab"))


def test_spin_adapted_single_is_normalized_singlet():
    hf = determinant_from_notation("20")
    spec = spin_adapted_single(hf, 0, 1)
    assert len(spec.entries) == 2
    assert sum(c * c for _, c in spec.entries) == pytest.approx(1.0)
    assert {d.notation() for d, _ in spec.entries} == {"ab", "ba"}
    with pytest.raises(QpdeInputError):
        spin_adapted_single(hf, 1, 0)


class TestControlledPr:
    def test_dense_is_block_diagonal(self):
        phi0 = SuperpositionSpec.single(determinant_from_notation("20"))
        phi1 = SuperpositionSpec.single(determinant_from_notation("aa"))
        cpr = build_controlled_pr(phi0, phi1)
        np.testing.assert_allclose(cpr.dense[:16, :16], pr_unitary(phi0), atol=1e-12)
        np.testing.assert_allclose(cpr.dense[16:, 16:], pr_unitary(phi1), atol=1e-12)
        np.testing.assert_allclose(cpr.dense[:16, 16:], 0.0)

    def test_gate_list_equals_dense(self):
        phi0 = two_config_state(0.1, determinant_from_notation("20"), determinant_from_notation("02"))
        phi1 = SuperpositionSpec.single(determinant_from_notation("ab"))
        cpr = build_controlled_pr(phi0, phi1)
        np.testing.assert_allclose(circuit_unitary(cpr.gates, 5), cpr.dense, atol=1e-12)

    def test_for_ancilla_targets_system_register(self):
        phi0 = SuperpositionSpec.single(DeterminantSpec(0b01, 2))
        phi1 = SuperpositionSpec.single(DeterminantSpec(0b10, 2))
        cpr = build_controlled_pr(phi0, phi1)
        layout = sv.RegisterLayout(2, 2)
        state = sv.init_state(layout)
        sv.apply_gate(state, "X", 1)
        sv.apply_circuit(state, cpr.for_ancilla(1, 2))
        # 보조 큐비트 1 = 1 → Pr(e) 가 시스템 큐비트 1 (전체 큐비트 3) 을 켭니다.
        assert abs(state.amplitudes[0b0101]) == pytest.approx(1.0)


def test_excitation_operator_maps_phi0_to_phi1():
    phi0 = two_config_state(0.1, determinant_from_notation("20"), determinant_from_notation("02"))
    phi1 = SuperpositionSpec.single(determinant_from_notation("aa"))
    ex = excitation_operator(phi0, phi1)
    np.testing.assert_allclose(ex @ phi0.statevector(), phi1.statevector(), atol=1e-12)
    np.testing.assert_allclose(ex.conj().T @ ex, np.eye(16), atol=1e-12)


def test_excitation_operator_is_identity_off_the_plane():
    phi0 = SuperpositionSpec.single(determinant_from_notation("20"))
    phi1 = SuperpositionSpec.single(determinant_from_notation("02"))
    ex = excitation_operator(phi0, phi1)
    untouched = determinant_from_notation("ab").basis_index()
    assert ex[untouched, untouched] == pytest.approx(1.0)
    np.testing.assert_allclose(ex @ phi1.statevector(), -phi0.statevector(), atol=1e-12)
    np.testing.assert_allclose(excitation_operator(phi0, phi0), np.eye(16))
