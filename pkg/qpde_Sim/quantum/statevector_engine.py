# ==============================================================================
# statevector_engine.py - N_a + N_s 큐비트 상태벡터 시뮬레이터
# ==============================================================================
# [레지스터 규약]
# - 큐비트 0..N_a-1 은 보조(ancilla) 큐비트, 그 뒤 N_s 개가 시스템 큐비트입니다.
# - 큐비트 q 는 진폭 인덱스의 (전체-1-q) 번째 비트입니다.
#   → 전체 인덱스 = y · 2^{N_s} + s  (y: 보조 레지스터 정수, s: 시스템 인덱스)
#   → 보조 큐비트 m 은 y 에서 2^{N_a-1-m} 자리, 즉 φ = 0.x_1x_2... 의 (m+1) 번째 자리.
#
# [연산 종류]
# - apply_gate: H / X / RY / P 단일 큐비트 게이트 (+ 값 지정 제어 큐비트)
# - apply_pauli_rotation: exp(-iθP), 비트 뒤집기 마스크로 진폭 쌍을 계산
# - apply_system_operator: 시스템 부분 레지스터에 밀집 유니터리 적용 (보조 큐비트 제어 가능)
# - ancilla_distribution / sample_outcome: 보조 레지스터 측정 통계
# ==============================================================================
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hamiltonian.pauli_core import PauliTerm
from utils import NumericalGuardError, QpdeInputError, format_bitstring, sim_setting

logger = logging.getLogger(__name__)

GATE_NAMES = ("H", "X", "RY", "P")


@dataclass(frozen=True)
class RegisterLayout:
    n_ancilla: int
    n_system: int

    def __post_init__(self):
        if self.n_ancilla < 1 or self.n_system < 1:
            raise QpdeInputError(f"큐비트 수는 1 이상이어야 합니다: N_a={self.n_ancilla}, N_s={self.n_system}")
        limit = sim_setting("max_total_qubits")
        if self.total_qubits > limit:
            raise NumericalGuardError(f"메모리 가드: N_a + N_s = {self.total_qubits} > {limit}")

    @property
    def total_qubits(self) -> int:
        return self.n_ancilla + self.n_system

    @property
    def ancilla_dim(self) -> int:
        return 1 << self.n_ancilla

    @property
    def system_dim(self) -> int:
        return 1 << self.n_system

    def system_qubit(self, q: int) -> int:
        return self.n_ancilla + q


@dataclass
class StateVector:
    amplitudes: np.ndarray
    layout: RegisterLayout

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.layout)

    def blocks(self) -> np.ndarray:
        """(2^{N_a}, 2^{N_s}) 보기. 원본 진폭과 메모리를 공유합니다."""
        return self.amplitudes.reshape(self.layout.ancilla_dim, self.layout.system_dim)

    def check_norm(self, tolerance: float = 1e-9) -> None:
        drift = abs(self.norm() - 1.0)
        if drift > tolerance:
            raise NumericalGuardError(f"상태벡터 노름이 1 에서 벗어났습니다: |‖ψ‖-1| = {drift:.3e}")


@dataclass(frozen=True)
class OutcomeDistribution:
    probabilities: np.ndarray
    n_ancilla: int

    def __post_init__(self):
        if self.probabilities.shape != (1 << self.n_ancilla,):
            raise QpdeInputError(f"분포 길이 {self.probabilities.shape} 가 2^{self.n_ancilla} 와 다릅니다.")

    def bitstring(self, y: int) -> str:
        return format_bitstring(y, self.n_ancilla)

    def total_variation(self, other: "OutcomeDistribution") -> float:
        return 0.5 * float(np.abs(self.probabilities - other.probabilities).sum())

    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))

    def as_records(self, min_probability: float = 0.0) -> list:
        return [
            {"index": int(y), "bitstring": self.bitstring(y), "probability": float(p)}
            for y, p in enumerate(self.probabilities)
            if p > min_probability
        ]


@dataclass(frozen=True)
class Gate:
    """
    단일 큐비트 게이트 한 개. controls 는 (큐비트, 제어값) 쌍의 튜플입니다.
    """

    name: str
    target: int
    theta: float = 0.0
    controls: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise QpdeInputError(f"지원하지 않는 게이트입니다: {self.name} (가능: {', '.join(GATE_NAMES)})")

    def inverse(self) -> "Gate":
        if self.name in ("RY", "P"):
            return Gate(self.name, self.target, -self.theta, self.controls)
        return self

    def shifted(self, offset: int) -> "Gate":
        return Gate(
            self.name,
            self.target + offset,
            self.theta,
            tuple((q + offset, v) for q, v in self.controls),
        )

    def controlled(self, qubit: int, value: int = 1) -> "Gate":
        return Gate(self.name, self.target, self.theta, ((qubit, value),) + self.controls)


def gate_matrix(name: str, theta: float = 0.0) -> np.ndarray:
    if name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
    if name == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if name == "RY":
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "P":
        return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)
    raise QpdeInputError(f"지원하지 않는 게이트입니다: {name}")


def _normalize_controls(controls) -> tuple:
    out = []
    for c in controls or ():
        if isinstance(c, (tuple, list)):
            out.append((int(c[0]), int(c[1])))
        else:
            out.append((int(c), 1))
    return tuple(out)


def apply_gate_tensor(tensor: np.ndarray, n_qubits: int, matrix: np.ndarray, target: int, controls=()) -> None:
    """
    (2,)*n_qubits + (나머지 축) 모양의 텐서에 2×2 행렬을 제자리 적용합니다.

    제어 큐비트가 지정한 값일 때만 target 의 |0⟩/|1⟩ 성분이 섞입니다.
    """
    controls = _normalize_controls(controls)
    for q in (target, *(c for c, _ in controls)):
        if not 0 <= q < n_qubits:
            raise QpdeInputError(f"큐비트 인덱스 {q} 가 범위(0..{n_qubits - 1})를 벗어났습니다.")
    if target in {c for c, _ in controls}:
        raise QpdeInputError(f"target 큐비트 {target} 가 제어 큐비트에 포함되어 있습니다.")

    index = [slice(None)] * n_qubits
    for q, v in controls:
        index[q] = v
    zero, one = list(index), list(index)
    zero[target], one[target] = 0, 1
    zero, one = tuple(zero), tuple(one)

    a = tensor[zero].copy()
    b = tensor[one].copy()
    tensor[zero] = matrix[0, 0] * a + matrix[0, 1] * b
    tensor[one] = matrix[1, 0] * a + matrix[1, 1] * b


# ------------------------------------------------------------------------------
# 상태 준비 / 게이트
# ------------------------------------------------------------------------------
def init_state(layout: RegisterLayout) -> StateVector:
    amplitudes = np.zeros(1 << layout.total_qubits, dtype=complex)
    amplitudes[0] = 1.0
    return StateVector(amplitudes, layout)


def apply_gate(state: StateVector, gate: str, target: int, controls=(), theta: float = 0.0) -> StateVector:
    n = state.layout.total_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    apply_gate_tensor(tensor, n, gate_matrix(gate, theta), target, controls)
    return state


def apply_circuit(state: StateVector, gates) -> StateVector:
    for g in gates:
        apply_gate(state, g.name, g.target, g.controls, g.theta)
    return state


# ------------------------------------------------------------------------------
# 파울리 회전
# ------------------------------------------------------------------------------
def _chunk_ranges(dim: int, workers: int) -> list:
    workers = max(1, min(workers, dim))
    step = -(-dim // workers)
    return [(lo, min(lo + step, dim)) for lo in range(0, dim, step)]


def apply_pauli_rotation(
    state: StateVector,
    term: PauliTerm,
    angle_scale: float,
    control: tuple | None = None,
    workers: int | None = None,
) -> StateVector:
    """
    ψ ← exp(-i·ω·s·P) ψ = cos(ω s) ψ - i sin(ω s) P ψ  (s = angle_scale)

    P 는 시스템 큐비트에만 작용합니다. control=(보조 큐비트 m, 값) 이면
    그 보조 비트가 값과 같은 가지에서만 회전합니다.
    workers > 1 이면 진폭 구간을 나누어 스레드로 계산하고, 결과는 직렬 계산과 같습니다.
    """
    layout = state.layout
    if term.string.n_qubits != layout.n_system:
        raise QpdeInputError(f"파울리 항 길이 {term.string.n_qubits} 가 N_s={layout.n_system} 와 다릅니다.")
    theta = term.coefficient * angle_scale
    if theta == 0.0:
        return state

    cos_t, sin_t = math.cos(theta), math.sin(theta)
    source = state.amplitudes.copy()
    target = state.amplitudes
    total = layout.total_qubits
    control_bit = None
    if control is not None:
        m, value = control
        if not 0 <= m < layout.n_ancilla:
            raise QpdeInputError(f"제어 보조 큐비트 {m} 가 범위를 벗어났습니다.")
        control_bit = (total - 1 - m, int(value))

    def _work(lo: int, hi: int) -> None:
        idx = np.arange(lo, hi, dtype=np.int64)
        pair = idx ^ term.string.flip_mask
        _, phases = term.string.action(pair)
        rotated = cos_t * source[lo:hi] - 1j * sin_t * phases * source[pair]
        if control_bit is not None:
            selected = ((idx >> control_bit[0]) & 1) == control_bit[1]
            rotated = np.where(selected, rotated, source[lo:hi])
        target[lo:hi] = rotated

    workers = workers or sim_setting("workers")
    ranges = _chunk_ranges(len(source), workers)
    if len(ranges) == 1:
        _work(*ranges[0])
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            list(pool.map(lambda r: _work(*r), ranges))
    return state


# ------------------------------------------------------------------------------
# 시스템 레지스터 밀집 연산
# ------------------------------------------------------------------------------
def check_unitary(op: np.ndarray, tolerance: float | None = None) -> None:
    tolerance = sim_setting("unitarity_tolerance") if tolerance is None else tolerance
    defect = float(np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))))
    if defect > tolerance:
        raise NumericalGuardError(f"유니터리가 아닙니다: max|U†U - I| = {defect:.3e} > {tolerance:g}")


def apply_system_operator(
    state: StateVector,
    op: np.ndarray,
    control: tuple | None = None,
    check: bool = True,
) -> StateVector:
    """
    시스템 부분 레지스터에 op 를 적용합니다.

    control=(보조 큐비트 m, 값) 이면 그 보조 비트가 값과 같은 가지에만 적용합니다.
    """
    layout = state.layout
    if op.shape != (layout.system_dim, layout.system_dim):
        raise QpdeInputError(f"연산자 크기 {op.shape} 가 시스템 차원 {layout.system_dim} 와 다릅니다.")
    if check:
        check_unitary(op)

    if control is None:
        blocks = state.blocks()
        blocks[:] = blocks @ op.T
        return state

    m, value = control
    if not 0 <= m < layout.n_ancilla:
        raise QpdeInputError(f"제어 보조 큐비트 {m} 가 범위를 벗어났습니다.")
    view = state.amplitudes.reshape(1 << m, 2, 1 << (layout.n_ancilla - 1 - m), layout.system_dim)
    branch = view[:, int(value)]
    view[:, int(value)] = branch @ op.T
    return state


# ------------------------------------------------------------------------------
# 측정 통계
# ------------------------------------------------------------------------------
def ancilla_distribution(state: StateVector) -> OutcomeDistribution:
    """p(y) = Σ_s |ψ(y, s)|². 상태는 붕괴시키지 않습니다."""
    probabilities = np.sum(np.abs(state.blocks()) ** 2, axis=1)
    probabilities = np.clip(probabilities, 0.0, None)
    total = float(probabilities.sum())
    if abs(total - 1.0) > 1e-9:
        raise NumericalGuardError(f"보조 레지스터 분포 합이 1 이 아닙니다: {total:.12f}")
    return OutcomeDistribution(probabilities, state.layout.n_ancilla)


def _as_distribution(source) -> OutcomeDistribution:
    return source if isinstance(source, OutcomeDistribution) else ancilla_distribution(source)


def sample_outcome(source, seed: int) -> tuple[str, int]:
    """
    시드 고정 난수로 역누적분포 표본을 하나 뽑아 (비트열, y) 를 돌려줍니다.
    source 는 StateVector 또는 OutcomeDistribution.
    """
    dist = _as_distribution(source)
    cdf = np.cumsum(dist.probabilities)
    u = np.random.default_rng(seed).random()
    y = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    y = min(y, len(cdf) - 1)
    return dist.bitstring(y), y


def sample_outcomes(source, shots: int, seed: int) -> np.ndarray:
    """같은 역누적분포 규칙으로 shots 개의 y 를 한꺼번에 뽑습니다."""
    dist = _as_distribution(source)
    cdf = np.cumsum(dist.probabilities)
    u = np.random.default_rng(seed).random(shots)
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), len(cdf) - 1)


def dump_amplitudes(state: StateVector, path: str) -> str:
    """디버깅용 덤프: 인덱스 순서의 (실수부, 허수부) little-endian float64 쌍."""
    state.amplitudes.astype("<c16").tofile(path)
    logger.debug("진폭 덤프 저장: %s (%d개)", path, state.amplitudes.size)
    return path
