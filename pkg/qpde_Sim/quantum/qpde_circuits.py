# ==============================================================================
# qpde_circuits.py - QPE / QPDE 회로 실행과 단일 보조 큐비트 확률 평가
# ==============================================================================
# [회로 구성]
# - run_qpe        : H^{⊗N_a} → Pr(g) → controlled-U^{2^k} → 역 QFT
# - run_qpde       : H^{⊗N_a} → 보조 큐비트 m 마다
#                    [controlled-Pr, U^{2^{N_a-1-m}}, controlled-Pr†] → 역 QFT
# - run_qpde_naive : H^{⊗N_a} → Pr(g) → 보조 큐비트 m 마다
#                    [controlled-Ex, U^{2^{N_a-1-m}}, controlled-Ex†] → 역 QFT
#                    (|Φ0⟩ 가 고유상태가 아니면 틀린 결과를 주는 대조군)
# - bpe_prob0 / bpde_prob0 : 보조 큐비트 1개 회로의 Prob(0) 격자 계산
#
# 시간 전개에서는 항등 계수 C 를 뺀 해밀토니안을 사용합니다 (전역 위상).
# QPE 총 에너지 복원 시 analysis.decoding.decode_total_energy 가 C 를 다시 더합니다.
# ==============================================================================
import logging
import math
from dataclasses import dataclass

import numpy as np

from hamiltonian.pauli_core import PauliSum
from quantum import statevector_engine as sv
from quantum.evolution_compiler import (
    EvolutionSpec,
    apply_evolution,
    compile_evolution,
    compile_step,
    exact_evolution,
    resolve_path,
)
from quantum.state_prep import SuperpositionSpec, build_controlled_pr, build_pr_circuit, excitation_operator
from utils import QpdeInputError

logger = logging.getLogger(__name__)

MODES = ("qpe", "qpde", "qpde_naive")


@dataclass(frozen=True)
class CircuitRunConfig:
    hamiltonian: PauliSum
    layout: sv.RegisterLayout
    evolution: EvolutionSpec
    phi0: SuperpositionSpec
    phi1: SuperpositionSpec | None = None
    mode: str = "qpde"
    workers: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise QpdeInputError(f"알 수 없는 실행 모드: {self.mode} (가능: {', '.join(MODES)})")
        if self.hamiltonian.qubit_count != self.layout.n_system:
            raise QpdeInputError(
                f"해밀토니안 큐비트 수 {self.hamiltonian.qubit_count} 가 N_s={self.layout.n_system} 와 다릅니다."
            )
        for name, spec in (("phi0", self.phi0), ("phi1", self.phi1)):
            if spec is not None and spec.n_modes != self.layout.n_system:
                raise QpdeInputError(f"{name} 의 큐비트 수 {spec.n_modes} 가 N_s={self.layout.n_system} 와 다릅니다.")
        if self.mode != "qpe" and self.phi1 is None:
            raise QpdeInputError(f"{self.mode} 모드에는 |Φ1⟩ (phi1) 이 필요합니다.")

    @property
    def resolved_path(self) -> str:
        return resolve_path(self.evolution, self.layout.n_ancilla)

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "n_ancilla": self.layout.n_ancilla,
            "n_system": self.layout.n_system,
            "total_time": self.evolution.total_time,
            "steps": self.evolution.steps,
            "dt": self.evolution.dt,
            "path": self.resolved_path,
            "power_method": self.evolution.power_method,
            "ordering": self.evolution.ordering,
            "identity_coefficient": self.hamiltonian.identity_coefficient,
            "phi0": self.phi0.describe(),
            "phi1": self.phi1.describe() if self.phi1 is not None else None,
        }


# ------------------------------------------------------------------------------
# 양자 푸리에 변환
# ------------------------------------------------------------------------------
def inverse_qft(state: sv.StateVector) -> sv.StateVector:
    """
    보조 레지스터에 (1/√N) e^{-2πi x y / N} 를 적용합니다 (N = 2^{N_a}).
    위상 e^{2πi x φ} 램프는 y = φN 으로 모입니다.
    """
    blocks = state.blocks()
    blocks[:] = np.fft.fft(blocks, axis=0, norm="ortho")
    return state


def forward_qft(state: sv.StateVector) -> sv.StateVector:
    blocks = state.blocks()
    blocks[:] = np.fft.ifft(blocks, axis=0, norm="ortho")
    return state


def _swap_gates(a: int, b: int) -> list:
    return [sv.Gate("X", b, controls=((a, 1),)), sv.Gate("X", a, controls=((b, 1),)), sv.Gate("X", b, controls=((a, 1),))]


def qft_gates(n_ancilla: int) -> list:
    """H + controlled-P(2π/2^k) + 마지막 SWAP 으로 이루어진 순방향 QFT (큐비트 0 이 최상위 비트)."""
    gates = []
    for j in range(n_ancilla):
        gates.append(sv.Gate("H", j))
        for k in range(j + 1, n_ancilla):
            gates.append(sv.Gate("P", j, 2.0 * math.pi / (1 << (k - j + 1)), ((k, 1),)))
    for j in range(n_ancilla // 2):
        gates += _swap_gates(j, n_ancilla - 1 - j)
    return gates


def inverse_qft_gates(n_ancilla: int) -> list:
    return [g.inverse() for g in reversed(qft_gates(n_ancilla))]


# ------------------------------------------------------------------------------
# 회로 실행
# ------------------------------------------------------------------------------
def _hadamard_all(state: sv.StateVector) -> None:
    for m in range(state.layout.n_ancilla):
        sv.apply_gate(state, "H", m)


def _compiled(config: CircuitRunConfig):
    return compile_evolution(config.hamiltonian.without_identity(), config.evolution, config.layout.n_ancilla)


def run_qpe(config: CircuitRunConfig) -> sv.OutcomeDistribution:
    """보조 큐비트 m 이 U^{2^{N_a-1-m}} 를 제어하는 N 큐비트 QPE."""
    if config.mode != "qpe":
        raise QpdeInputError(f"run_qpe 에는 qpe 모드 설정이 필요합니다: {config.mode}")
    layout = config.layout
    compiled = _compiled(config)
    state = sv.init_state(layout)
    _hadamard_all(state)
    sv.apply_circuit(state, [g.shifted(layout.n_ancilla) for g in build_pr_circuit(config.phi0)])
    for m in range(layout.n_ancilla):
        k = layout.n_ancilla - 1 - m
        apply_evolution(state, compiled, k, config.evolution.steps, (m, 1), config.workers)
    inverse_qft(state)
    state.check_norm()
    return sv.ancilla_distribution(state)


def run_qpde(config: CircuitRunConfig) -> sv.OutcomeDistribution:
    """controlled-Pr 블록으로 위상차를 읽는 QPDE."""
    if config.mode != "qpde":
        raise QpdeInputError(f"run_qpde 에는 qpde 모드 설정이 필요합니다: {config.mode}")
    layout = config.layout
    compiled = _compiled(config)
    cpr = build_controlled_pr(config.phi0, config.phi1)
    state = sv.init_state(layout)
    _hadamard_all(state)
    for m in range(layout.n_ancilla):
        k = layout.n_ancilla - 1 - m
        sv.apply_circuit(state, cpr.for_ancilla(m, layout.n_ancilla))
        apply_evolution(state, compiled, k, config.evolution.steps, None, config.workers)
        sv.apply_circuit(state, cpr.inverse_for_ancilla(m, layout.n_ancilla))
        logger.debug("QPDE 블록 %d/%d 완료", m + 1, layout.n_ancilla)
    inverse_qft(state)
    state.check_norm()
    return sv.ancilla_distribution(state)


def run_qpde_naive(config: CircuitRunConfig) -> sv.OutcomeDistribution:
    """controlled-Ex 를 쓰는 단순 QPDE. |Φ0⟩ 가 고유상태일 때만 run_qpde 와 같습니다."""
    if config.mode != "qpde_naive":
        raise QpdeInputError(f"run_qpde_naive 에는 qpde_naive 모드 설정이 필요합니다: {config.mode}")
    layout = config.layout
    compiled = _compiled(config)
    ex = excitation_operator(config.phi0, config.phi1)
    ex_dagger = ex.conj().T
    state = sv.init_state(layout)
    _hadamard_all(state)
    sv.apply_circuit(state, [g.shifted(layout.n_ancilla) for g in build_pr_circuit(config.phi0)])
    for m in range(layout.n_ancilla):
        k = layout.n_ancilla - 1 - m
        sv.apply_system_operator(state, ex, (m, 1))
        apply_evolution(state, compiled, k, config.evolution.steps, None, config.workers)
        sv.apply_system_operator(state, ex_dagger, (m, 1))
    inverse_qft(state)
    state.check_norm()
    return sv.ancilla_distribution(state)


RUNNERS = {"qpe": run_qpe, "qpde": run_qpde, "qpde_naive": run_qpde_naive}


def run_circuit(config: CircuitRunConfig) -> sv.OutcomeDistribution:
    return RUNNERS[config.mode](config)


def run_payload(config: CircuitRunConfig, dist: sv.OutcomeDistribution, metadata: dict | None = None) -> dict:
    """결과 JSON 본문. 실행마다 달라지는 값(시간 등)은 metadata 에만 둡니다."""
    return {
        "config": config.describe(),
        "bins": dist.as_records(min_probability=1e-12),
        "metadata": dict(metadata or {}),
    }


# ------------------------------------------------------------------------------
# 해석적 커널
# ------------------------------------------------------------------------------
def phase_kernel(phi: float, n_ancilla: int) -> np.ndarray:
    """
    고유위상 φ 에 대한 역 QFT 결과 분포
    p(y) = |sin(Nπδ) / (N sin(πδ))|²,  δ = φ - y/N
    """
    size = 1 << n_ancilla
    delta = phi - np.arange(size) / size
    numerator = np.sin(size * math.pi * delta)
    denominator = size * np.sin(math.pi * delta)
    aligned = np.abs(denominator) < 1e-12
    ratio = np.divide(numerator, denominator, out=np.ones_like(delta), where=~aligned)
    return ratio**2


def gap_to_phase(delta_e: float, total_time: float) -> float:
    """ΔE → Δφ = -ΔE·t/2π mod 1."""
    return (-delta_e * total_time / (2.0 * math.pi)) % 1.0


# ------------------------------------------------------------------------------
# 단일 보조 큐비트 Prob(0) (BPE / BPDE)
# ------------------------------------------------------------------------------
def _evolution_unitary(h: PauliSum, t: float, evolution: EvolutionSpec | None) -> np.ndarray:
    """U(t). Trotter 경로에서도 항등 계수는 스칼라 위상 e^{-iCt} 로 정확히 넣습니다."""
    if evolution is None or evolution.path == "exact":
        return exact_evolution(h, t)
    step = compile_step(h.without_identity(), evolution.dt, evolution.ordering)
    return np.exp(-1j * h.identity_coefficient * t) * np.linalg.matrix_power(step, evolution.steps)


def _readout_prob0(prepared: sv.StateVector, grid, t: float) -> np.ndarray:
    out = np.empty(len(grid))
    for i, value in enumerate(grid):
        state = prepared.copy()
        sv.apply_gate(state, "P", 0, theta=float(value) * t)
        sv.apply_gate(state, "H", 0)
        out[i] = sv.ancilla_distribution(state).probabilities[0]
    return out


def bpe_prob0(h: PauliSum, phi0: SuperpositionSpec, epsilon_grid, t: float, evolution: EvolutionSpec | None = None) -> np.ndarray:
    """H - controlled-U - P(εt) - H 회로에서 보조 큐비트가 |0⟩ 일 확률."""
    if not t > 0:
        raise QpdeInputError(f"t 는 양수여야 합니다: {t}")
    layout = sv.RegisterLayout(1, h.qubit_count)
    state = sv.init_state(layout)
    sv.apply_circuit(state, [g.shifted(1) for g in build_pr_circuit(phi0)])
    sv.apply_gate(state, "H", 0)
    sv.apply_system_operator(state, _evolution_unitary(h, t, evolution), (0, 1))
    return _readout_prob0(state, epsilon_grid, t)


def bpde_prob0(
    h: PauliSum,
    phi0: SuperpositionSpec,
    phi1: SuperpositionSpec,
    delta_grid,
    t: float,
    evolution: EvolutionSpec | None = None,
) -> np.ndarray:
    """H - controlled-Ex - U - controlled-Ex† - P(Δε t) - H 회로에서 보조 큐비트가 |0⟩ 일 확률."""
    if not t > 0:
        raise QpdeInputError(f"t 는 양수여야 합니다: {t}")
    layout = sv.RegisterLayout(1, h.qubit_count)
    ex = excitation_operator(phi0, phi1)
    state = sv.init_state(layout)
    sv.apply_circuit(state, [g.shifted(1) for g in build_pr_circuit(phi0)])
    sv.apply_gate(state, "H", 0)
    sv.apply_system_operator(state, ex, (0, 1))
    sv.apply_system_operator(state, _evolution_unitary(h, t, evolution))
    sv.apply_system_operator(state, ex.conj().T, (0, 1))
    return _readout_prob0(state, delta_grid, t)


def bpe_formula(weights, energies, epsilon_grid, t: float) -> np.ndarray:
    """Prob(0) = ½[1 + Σ_j |c_j|² cos((E_j - ε)t)]"""
    weights, energies = np.asarray(weights), np.asarray(energies)
    grid = np.asarray(epsilon_grid, dtype=float)
    return 0.5 * (1.0 + np.cos((energies[None, :] - grid[:, None]) * t) @ weights)


def bpde_formula(c_weights, d_weights, energies, delta_grid, t: float) -> np.ndarray:
    """Prob(0) = ½[1 + Σ_jk |c_j|²|d_k|² cos((E_k - E_j - Δε)t)]"""
    c_weights, d_weights, energies = np.asarray(c_weights), np.asarray(d_weights), np.asarray(energies)
    gaps = energies[None, :] - energies[:, None]
    pair_weights = np.outer(c_weights, d_weights)
    grid = np.asarray(delta_grid, dtype=float)
    return 0.5 * (1.0 + np.array([np.sum(pair_weights * np.cos((gaps - d) * t)) for d in grid]))
