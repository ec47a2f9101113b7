import math
import time

import numpy as np
import pytest

from analysis.decoding import decode_phase, decode_total_energy, find_peaks, gap_report
from analysis.reference import candidate_gaps, reference_spectrum, spectral_decomposition
from data_manager import load_qubit_hamiltonian, load_state_spec
from hamiltonian.fermion_hamiltonian import DeterminantSpec
from hamiltonian.pauli_core import PauliSum
from quantum import statevector_engine as sv
from quantum.evolution_compiler import EvolutionSpec
from quantum.qpde_circuits import (
    CircuitRunConfig,
    bpde_formula,
    bpde_prob0,
    bpe_formula,
    bpe_prob0,
    forward_qft,
    gap_to_phase,
    inverse_qft,
    inverse_qft_gates,
    phase_kernel,
    qft_gates,
    run_circuit,
    run_payload,
    run_qpde,
)
from quantum.state_prep import SuperpositionSpec
from utils import QpdeInputError

# |Φ0⟩ = (|10⟩ + |01⟩)/√2 는 diagonal_toy 의 고유상태가 아닙니다.
HALF_MIX = SuperpositionSpec(
    ((DeterminantSpec(1 << 0, 2), 1 / math.sqrt(2)), (DeterminantSpec(1 << 1, 2), 1 / math.sqrt(2)))
)
BOTH_OCCUPIED = SuperpositionSpec.single(DeterminantSpec(0b11, 2))


def _config(h, n_ancilla, phi0, phi1=None, mode="qpde", t=1.0, steps=1, path="exact"):
    return CircuitRunConfig(
        hamiltonian=h,
        layout=sv.RegisterLayout(n_ancilla, h.qubit_count),
        evolution=EvolutionSpec(t, steps, path=path),
        phi0=phi0,
        phi1=phi1,
        mode=mode,
    )


class TestCircuitRunConfig:
    def test_qpde_needs_phi1(self, toy_hamiltonian, toy_states):
        with pytest.raises(QpdeInputError):
            _config(toy_hamiltonian(0.3), 3, toy_states[0])

    def test_unknown_mode(self, toy_hamiltonian, toy_states):
        with pytest.raises(QpdeInputError):
            _config(toy_hamiltonian(0.3), 3, *toy_states, mode="bpe")

    def test_qubit_count_mismatch(self, h2_2orb, toy_states):
        with pytest.raises(QpdeInputError):
            _config(h2_2orb, 3, *toy_states)


class TestQft:
    @pytest.fixture
    def state(self):
        layout = sv.RegisterLayout(3, 1)
        rng = np.random.default_rng(4)
        amplitudes = rng.normal(size=16) + 1j * rng.normal(size=16)
        return sv.StateVector(amplitudes / np.linalg.norm(amplitudes), layout)

    def test_gate_level_inverse_matches_fft(self, state):
        gates = state.copy()
        sv.apply_circuit(gates, inverse_qft_gates(3))
        np.testing.assert_allclose(gates.amplitudes, inverse_qft(state.copy()).amplitudes, atol=1e-12)

    def test_gate_level_forward_matches_inverse_fft(self, state):
        gates = state.copy()
        sv.apply_circuit(gates, qft_gates(3))
        np.testing.assert_allclose(gates.amplitudes, forward_qft(state.copy()).amplitudes, atol=1e-12)


class TestAnalyticKernel:
    def test_kernel_is_normalized_and_peaks_at_phase(self):
        kernel = phase_kernel(0.3, 6)
        assert kernel.sum() == pytest.approx(1.0)
        assert int(np.argmax(kernel)) == round(0.3 * 64)

    def test_qpe_matches_kernel(self, toy_hamiltonian, toy_states):
        omega = 0.37
        dist = run_circuit(_config(toy_hamiltonian(omega), 8, toy_states[0], mode="qpe"))
        np.testing.assert_allclose(dist.probabilities, phase_kernel(gap_to_phase(-omega, 1.0), 8), atol=1e-9)

    def test_qpde_matches_kernel(self, toy_hamiltonian, toy_states):
        omega = 0.37
        dist = run_circuit(_config(toy_hamiltonian(omega), 8, *toy_states))
        np.testing.assert_allclose(dist.probabilities, phase_kernel(gap_to_phase(2 * omega, 1.0), 8), atol=1e-9)


class TestGridAligned:
    # ΔE = 2π·6/256, t = 1, N_a = 8 → Δφ = 250/256
    OMEGA = 3 * math.pi / 128

    @pytest.mark.parametrize("path", ["gate_level", "compiled_dense", "exact"])
    def test_qpde_single_outcome(self, toy_hamiltonian, toy_states, path):
        dist = run_circuit(_config(toy_hamiltonian(self.OMEGA), 8, *toy_states, path=path))
        assert dist.probabilities[250] >= 1 - 1e-9
        assert sv.sample_outcome(dist, 123) == ("11111010", 250)
        assert decode_phase(250, 8, 1.0).delta_e == pytest.approx(2 * math.pi * 6 / 256)

    def test_qpe_total_energy(self, toy_hamiltonian, toy_states):
        dist = run_circuit(_config(toy_hamiltonian(self.OMEGA), 8, toy_states[0], mode="qpe"))
        assert dist.argmax() == 3
        assert decode_total_energy(dist.argmax(), 8, 1.0) == pytest.approx(-self.OMEGA)

    def test_naive_eigenstate_is_deterministic(self, toy_hamiltonian, toy_states):
        dist = run_circuit(_config(toy_hamiltonian(self.OMEGA), 8, *toy_states, mode="qpde_naive"))
        assert dist.probabilities[250] >= 1 - 1e-9


class TestNaiveControl:
    def test_matches_corrected_circuit_for_eigenstate(self, toy_hamiltonian, toy_states):
        h = toy_hamiltonian(3 * math.pi / 8)
        naive = run_circuit(_config(h, 4, *toy_states, mode="qpde_naive"))
        corrected = run_circuit(_config(h, 4, *toy_states))
        assert naive.total_variation(corrected) < 1e-8

    def test_deviates_for_non_eigenstate(self, toy_hamiltonian):
        h = toy_hamiltonian(3 * math.pi / 8)
        naive = run_circuit(_config(h, 2, HALF_MIX, BOTH_OCCUPIED, mode="qpde_naive"))
        corrected = run_circuit(_config(h, 2, HALF_MIX, BOTH_OCCUPIED))
        # 해석값 |sin 4θ| sin²θ / 8 ≈ 0.107 (θ = 3π/8)
        assert naive.total_variation(corrected) > 0.05


def test_run_qpde_rejects_other_mode(toy_hamiltonian, toy_states):
    with pytest.raises(QpdeInputError):
        run_qpde(_config(toy_hamiltonian(0.2), 3, *toy_states, mode="qpde_naive"))


def test_run_payload_lists_nonzero_bins(toy_hamiltonian, toy_states):
    config = _config(toy_hamiltonian(TestGridAligned.OMEGA), 8, *toy_states)
    payload = run_payload(config, run_circuit(config), {"elapsed_seconds": 0.1})
    assert payload["config"]["mode"] == "qpde"
    assert payload["config"]["path"] == "exact"
    assert [b["index"] for b in payload["bins"]] == [250]
    assert payload["metadata"]["elapsed_seconds"] == 0.1


class TestSingleAncillaEstimators:
    GRID = np.linspace(-0.5, 0.5, 200)

    def test_bpe_circuit_matches_formula(self, h2_2orb, hf_2orb):
        ref = reference_spectrum(h2_2orb)
        weights = spectral_decomposition(ref, hf_2orb).weights
        circuit = bpe_prob0(h2_2orb, hf_2orb, self.GRID - 0.9, 10.0)
        formula = bpe_formula(weights, ref.energies, self.GRID - 0.9, 10.0)
        np.testing.assert_allclose(circuit, formula, atol=1e-8)

    def test_bpde_circuit_matches_formula_for_eigenstate_input(self, h2_2orb, hf_2orb, triplet_2orb):
        ref = reference_spectrum(h2_2orb)
        c_weights = spectral_decomposition(ref, triplet_2orb).weights
        d_weights = spectral_decomposition(ref, hf_2orb).weights
        circuit = bpde_prob0(h2_2orb, triplet_2orb, hf_2orb, self.GRID, 10.0)
        formula = bpde_formula(c_weights, d_weights, ref.energies, self.GRID, 10.0)
        np.testing.assert_allclose(circuit, formula, atol=1e-8)

    def test_bpde_peaks_at_toy_gap(self, toy_hamiltonian, toy_states):
        h = toy_hamiltonian(0.1)
        prob0 = bpde_prob0(h, *toy_states, self.GRID, 10.0)
        assert self.GRID[int(np.argmax(prob0))] == pytest.approx(0.2, abs=0.006)
        assert prob0.max() > 0.99

    def test_time_must_be_positive(self, toy_hamiltonian, toy_states):
        with pytest.raises(QpdeInputError):
            bpe_prob0(toy_hamiltonian(0.1), toy_states[0], self.GRID, 0.0)


def test_two_peaks_for_closed_shell_reference(h2_2orb, hf_2orb, triplet_2orb):
    dist = run_circuit(_config(h2_2orb, 8, hf_2orb, triplet_2orb, t=10.0))
    ref = reference_spectrum(h2_2orb, (2, None))
    oracle = candidate_gaps(ref, hf_2orb, triplet_2orb)
    assert set(oracle) == {"T1-S0", "T1-S2"}

    report = gap_report(dist, 8, 10.0, oracle)
    top = report.iloc[:2]
    assert set(top["label"]) == {"T1-S0", "T1-S2"}
    assert (top["deviation"].abs() <= top["resolution"]).all()
    assert top.iloc[0]["label"] == "T1-S0"
    assert bool(top.set_index("label").loc["T1-S2", "ambiguous"])


@pytest.mark.slow
def test_two_configuration_input_keeps_peak_positions(fcidump_4orb, data_file):
    h = load_qubit_hamiltonian(fcidump_4orb)
    phi1 = load_state_spec(data_file("phi_triplet_4orb.json"), 8, 2)
    hf = load_state_spec(data_file("phi_hf_4orb.json"), 8, 2)
    two_config = load_state_spec(data_file("phi_2c_4orb.json"), 8, 2)

    hf_dist = run_circuit(_config(h, 12, hf, phi1, t=10.0))
    tc_dist = run_circuit(_config(h, 12, two_config, phi1, t=10.0))
    hf_peaks = find_peaks(hf_dist)
    tc_peaks = find_peaks(tc_dist)

    assert tc_peaks[0].bin == hf_peaks[0].bin
    secondary = hf_peaks[1]
    tc_masses = {p.bin: p.mass for p in tc_peaks}
    assert tc_masses.get(secondary.bin, 0.0) < secondary.mass


def test_qpe_peak_masses_are_eigenstate_weights(toy_hamiltonian):
    ground, excited = DeterminantSpec(1 << 0, 2), DeterminantSpec(1 << 1, 2)
    mixed = SuperpositionSpec(((ground, math.sqrt(0.7)), (excited, math.sqrt(0.3))))
    dist = run_circuit(_config(toy_hamiltonian(TestGridAligned.OMEGA), 8, mixed, mode="qpe"))
    assert dist.probabilities[3] == pytest.approx(0.7, abs=1e-9)
    assert dist.probabilities[253] == pytest.approx(0.3, abs=1e-9)
    peaks = find_peaks(dist)
    assert [(pk.bin, round(pk.mass, 9)) for pk in peaks] == [(3, 0.7), (253, 0.3)]


@pytest.mark.parametrize("path, steps", [("exact", 1), ("compiled_dense", 20)])
def test_identity_term_does_not_change_qpde_distribution(h2_2orb, hf_2orb, triplet_2orb, path, steps):
    shifted = PauliSum(h2_2orb.terms, h2_2orb.qubit_count, h2_2orb.identity_coefficient + 0.8)
    runs = [
        run_circuit(_config(h, 6, hf_2orb, triplet_2orb, t=10.0, steps=steps, path=path))
        for h in (h2_2orb, shifted, h2_2orb.without_identity())
    ]
    assert runs[0].total_variation(runs[1]) < 1e-12
    assert runs[0].total_variation(runs[2]) < 1e-12


@pytest.mark.slow
class TestFourOrbitalGap:
    """4-오비탈 H2, N_a = 12, t = 10 에서 T1-S0 읽기."""

    N_ANCILLA = 12
    TIME = 10.0

    @pytest.fixture
    def setup(self, data_file):
        h = load_qubit_hamiltonian(data_file("fcidump_h2_4orb.txt"))
        hf = load_state_spec(data_file("phi_hf_4orb.json"), 8, 2)
        triplet = load_state_spec(data_file("phi_triplet_4orb.json"), 8, 2)
        oracle = candidate_gaps(reference_spectrum(h, (2, None)), hf, triplet)
        return h, hf, triplet, oracle

    def _dominant(self, setup, path, steps):
        h, hf, triplet, oracle = setup
        dist = run_circuit(_config(h, self.N_ANCILLA, hf, triplet, t=self.TIME, steps=steps, path=path))
        return gap_report(dist, self.N_ANCILLA, self.TIME, oracle).iloc[0]

    def test_exact_path_within_half_bin(self, setup):
        row = self._dominant(setup, "exact", 1)
        assert row["label"] == "T1-S0"
        assert abs(row["deviation"]) <= row["resolution"] / 2

    def test_trotter_half_step_close_to_oracle(self, setup):
        row = self._dominant(setup, "compiled_dense", 20)
        assert row["label"] == "T1-S0"
        assert abs(row["deviation"]) < 5e-3

    def test_compiled_run_finishes_within_a_minute(self, setup):
        h, hf, triplet, _ = setup
        config = _config(h, self.N_ANCILLA, hf, triplet, t=self.TIME, steps=20, path="compiled_dense")
        started = time.perf_counter()
        run_circuit(config)
        assert time.perf_counter() - started < 60.0
