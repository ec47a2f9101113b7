# ==============================================================================
# state_prep.py - |Φ0⟩, |Φ1⟩ 준비 회로와 controlled-Pr
# ==============================================================================
# [주요 기능]
# - SuperpositionSpec: 1~2개 행렬식의 실수 계수 중첩 상태
# - diradical_character / two_config_state: 두 배치 상태
#     |Φ_2c⟩ = √(1-y/2)|HONO²⟩ - √(y/2)|LUNO²⟩,  y = 1 - 2(1-n)/(1+(1-n)²)
# - spin_adapted_single: 스핀 적응 단일 들뜸 (1/√2)(a†_{qα}a_{pα} + a†_{qβ}a_{pβ})|hf⟩
# - build_pr_circuit: |0...0⟩ 에서 스펙을 만드는 게이트 목록 (X, RY, CNOT)
# - build_controlled_pr: |0⟩⟨0|⊗Pr(g) + |1⟩⟨1|⊗Pr(e)
# - excitation_operator: Ex|Φ0⟩ = |Φ1⟩ 인 평면 회전 (span{Φ0, Φ1} 밖에서는 항등)
#
# [위상 규약] 준비 회로는 첫 번째 계수가 양의 실수인 상태를 만듭니다.
# ==============================================================================
import logging
import math
from dataclasses import dataclass

import numpy as np

from hamiltonian.fermion_hamiltonian import ALPHA, BETA, DeterminantSpec, apply_ladder_string, spin_orbital
from quantum.statevector_engine import Gate, apply_gate_tensor, gate_matrix
from utils import QpdeInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuperpositionSpec:
    """(DeterminantSpec, 실수 계수) 쌍 1~2개."""

    entries: tuple

    def __post_init__(self):
        if not 1 <= len(self.entries) <= 2:
            raise QpdeInputError(f"중첩 상태는 행렬식 1~2개만 지원합니다: {len(self.entries)}개")
        dets = [d for d, _ in self.entries]
        if len({d.bits for d in dets}) != len(dets):
            raise QpdeInputError("중첩 상태의 행렬식이 서로 같습니다.")
        if len({d.n_modes for d in dets}) != 1:
            raise QpdeInputError("행렬식들의 스핀 오비탈 수가 다릅니다.")
        if len({d.n_electrons for d in dets}) != 1:
            raise QpdeInputError("행렬식들의 전자 수가 다릅니다.")
        norm = sum(c * c for _, c in self.entries)
        if abs(norm - 1.0) > 1e-12:
            raise QpdeInputError(f"계수 제곱합이 1 이 아닙니다: {norm:.15f}")

    @classmethod
    def single(cls, det: DeterminantSpec) -> "SuperpositionSpec":
        return cls(((det, 1.0),))

    @property
    def n_modes(self) -> int:
        return self.entries[0][0].n_modes

    @property
    def n_electrons(self) -> int:
        return self.entries[0][0].n_electrons

    def canonical(self) -> "SuperpositionSpec":
        """0 이 아닌 첫 계수가 양수가 되도록 전체 부호를 맞춘 스펙."""
        lead = next((c for _, c in self.entries if c != 0.0), 0.0)
        if lead >= 0:
            return self
        return SuperpositionSpec(tuple((d, -c) for d, c in self.entries))

    def statevector(self) -> np.ndarray:
        vector = np.zeros(1 << self.n_modes, dtype=complex)
        for det, c in self.entries:
            vector[det.basis_index()] = c
        return vector

    def describe(self) -> list:
        return [{"occupation": d.notation(), "bits": d.bitstring(), "coefficient": c} for d, c in self.entries]


@dataclass(frozen=True)
class DiradicalSpec:
    n_luno: float | None = None
    y: float | None = None

    def __post_init__(self):
        for name, value in (("n_LUNO", self.n_luno), ("y", self.y)):
            if value is not None and not 0.0 <= value <= 1.0:
                raise QpdeInputError(f"{name} 는 [0, 1] 범위여야 합니다: {value}")
        if self.n_luno is None and self.y is None:
            raise QpdeInputError("n_LUNO 와 y 중 하나는 지정해야 합니다.")
        if self.n_luno is not None and self.y is not None:
            expected = diradical_character(self.n_luno)
            if abs(expected - self.y) > 1e-12:
                raise QpdeInputError(f"y={self.y} 가 n_LUNO={self.n_luno} 에서 계산한 값 {expected} 와 다릅니다.")

    @property
    def value(self) -> float:
        return self.y if self.y is not None else diradical_character(self.n_luno)


def diradical_character(n_luno: float) -> float:
    """LUNO 점유수에서 디라디칼 특성 y."""
    if not 0.0 <= n_luno <= 1.0:
        raise QpdeInputError(f"n_LUNO 는 [0, 1] 범위여야 합니다: {n_luno}")
    hole = 1.0 - n_luno
    return 1.0 - 2.0 * hole / (1.0 + hole * hole)


def two_config_state(y: float, homo_det: DeterminantSpec, lumo_det: DeterminantSpec) -> SuperpositionSpec:
    """(√(1-y/2), -√(y/2)) 계수의 두 배치 상태."""
    if not 0.0 <= y <= 1.0:
        raise QpdeInputError(f"y 는 [0, 1] 범위여야 합니다: {y}")
    if homo_det.n_electrons != lumo_det.n_electrons or (homo_det.bits ^ lumo_det.bits).bit_count() != 4:
        raise QpdeInputError(
            f"두 행렬식은 이중 치환 관계여야 합니다: {homo_det.notation()} / {lumo_det.notation()}"
        )
    return SuperpositionSpec(((homo_det, math.sqrt(1.0 - y / 2.0)), (lumo_det, -math.sqrt(y / 2.0))))


def spin_adapted_single(hf: DeterminantSpec, p_spatial: int, q_spatial: int) -> SuperpositionSpec:
    """p (이중 점유) → q (비어 있음) 단일 들뜸의 단일항 적응 조합."""
    norb = hf.n_modes // 2
    if not (0 <= p_spatial < norb and 0 <= q_spatial < norb):
        raise QpdeInputError(f"오비탈 인덱스가 범위를 벗어났습니다: {p_spatial} → {q_spatial}")
    occupied = set(hf.occupied)
    p_modes = {spin_orbital(p_spatial, s) for s in (ALPHA, BETA)}
    q_modes = {spin_orbital(q_spatial, s) for s in (ALPHA, BETA)}
    if not p_modes <= occupied or q_modes & occupied:
        raise QpdeInputError(
            f"공간 오비탈 {p_spatial} 는 이중 점유, {q_spatial} 는 비어 있어야 합니다: {hf.notation()}"
        )

    entries = []
    for spin in (ALPHA, BETA):
        ops = ((spin_orbital(q_spatial, spin), 1), (spin_orbital(p_spatial, spin), 0))
        sign, occupation = apply_ladder_string(ops, hf.bits)
        entries.append((DeterminantSpec(occupation, hf.n_modes), sign / math.sqrt(2.0)))
    return SuperpositionSpec(tuple(entries))


# ------------------------------------------------------------------------------
# 준비 회로
# ------------------------------------------------------------------------------
def build_pr_circuit(spec: SuperpositionSpec) -> list:
    """
    |0...0⟩ 에서 spec.canonical() 을 만드는 게이트 목록 (큐비트 p = 스핀 오비탈 p).

    두 행렬식 D_a, D_b 인 경우:
      1. D_b 에만 있는 비트 하나(pivot)에 RY(2·atan2(c_b, c_a))
      2. pivot 에서 나머지 차이 비트들로 CNOT
      3. D_a 에만 있는 비트에 X
      4. 공통 비트에 X
    """
    live = [(d, c) for d, c in spec.canonical().entries if c != 0.0]
    if len(live) > 2:
        raise QpdeInputError("준비 회로는 행렬식 2개까지만 지원합니다.")
    if len(live) == 1:
        det, _ = live[0]
        return [Gate("X", p) for p in det.occupied]

    (det_a, c_a), (det_b, c_b) = live
    only_a = det_a.bits & ~det_b.bits
    only_b = det_b.bits & ~det_a.bits
    common = det_a.bits & det_b.bits

    def bits_of(mask: int) -> list:
        return [p for p in range(spec.n_modes) if (mask >> p) & 1]

    pivot = bits_of(only_b)[0]
    gates = [Gate("RY", pivot, 2.0 * math.atan2(c_b, c_a))]
    gates += [Gate("X", p, controls=((pivot, 1),)) for p in bits_of(only_a | only_b) if p != pivot]
    gates += [Gate("X", p) for p in bits_of(only_a)]
    gates += [Gate("X", p) for p in bits_of(common)]
    logger.debug("Pr 회로: pivot=%d, 게이트 %d개", pivot, len(gates))
    return gates


def inverse_circuit(gates: list) -> list:
    return [g.inverse() for g in reversed(gates)]


def circuit_unitary(gates: list, n_qubits: int) -> np.ndarray:
    """게이트 목록의 밀집 유니터리 (열 = 입력 기저)."""
    dim = 1 << n_qubits
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n_qubits + (dim,))
    for g in gates:
        apply_gate_tensor(tensor, n_qubits, gate_matrix(g.name, g.theta), g.target, g.controls)
    return tensor.reshape(dim, dim)


def pr_unitary(spec: SuperpositionSpec) -> np.ndarray:
    return circuit_unitary(build_pr_circuit(spec), spec.n_modes)


@dataclass(frozen=True)
class ControlledPr:
    """
    제어 큐비트 0 + 시스템 큐비트 1..N_s 위의 controlled-Pr.

    gates: 제어값 0 에서 Pr(g), 제어값 1 에서 Pr(e) 를 적용하는 게이트 목록
    dense: block-diag(Pr(g), Pr(e))
    """

    gates: list
    dense: np.ndarray
    phi0_gates: list
    phi1_gates: list

    def for_ancilla(self, ancilla: int, offset: int) -> list:
        """보조 큐비트 ancilla 가 제어하고 시스템이 offset 부터 시작하는 레지스터용 게이트 목록."""
        return [g.shifted(offset).controlled(ancilla, 0) for g in self.phi0_gates] + [
            g.shifted(offset).controlled(ancilla, 1) for g in self.phi1_gates
        ]

    def inverse_for_ancilla(self, ancilla: int, offset: int) -> list:
        return inverse_circuit(self.for_ancilla(ancilla, offset))


def build_controlled_pr(phi0: SuperpositionSpec, phi1: SuperpositionSpec) -> ControlledPr:
    if phi0.n_modes != phi1.n_modes:
        raise QpdeInputError(f"|Φ0⟩ 와 |Φ1⟩ 의 큐비트 수가 다릅니다: {phi0.n_modes} / {phi1.n_modes}")
    n = phi0.n_modes
    g_gates, e_gates = build_pr_circuit(phi0), build_pr_circuit(phi1)
    dim = 1 << n
    dense = np.zeros((2 * dim, 2 * dim), dtype=complex)
    dense[:dim, :dim] = circuit_unitary(g_gates, n)
    dense[dim:, dim:] = circuit_unitary(e_gates, n)
    gates = [g.shifted(1).controlled(0, 0) for g in g_gates] + [g.shifted(1).controlled(0, 1) for g in e_gates]
    return ControlledPr(gates, dense, g_gates, e_gates)


def excitation_operator(phi0: SuperpositionSpec, phi1: SuperpositionSpec) -> np.ndarray:
    """
    Ex|Φ0⟩ = |Φ1⟩ 인 밀집 유니터리 (두 상태 모두 위상 규약 적용).

    span{Φ0, Φ1} 평면 안의 회전이고 직교 여공간에는 항등으로 작용합니다.
    Pr(e)·Pr(g)† 로 만들면 단순 QPDE 회로가 Pr(g) 켤레변환만큼 보정 QPDE 와 같아집니다.
    """
    if phi0.n_modes != phi1.n_modes:
        raise QpdeInputError(f"|Φ0⟩ 와 |Φ1⟩ 의 큐비트 수가 다릅니다: {phi0.n_modes} / {phi1.n_modes}")
    u = phi0.canonical().statevector().real
    v = phi1.canonical().statevector().real
    ex = np.eye(u.size)
    overlap = float(u @ v)
    residual = v - overlap * u
    sine = float(np.linalg.norm(residual))
    if sine > 1e-12:
        e = residual / sine
        ex += (overlap - 1.0) * (np.outer(u, u) + np.outer(e, e)) + sine * (np.outer(e, u) - np.outer(u, e))
    return ex.astype(complex)
