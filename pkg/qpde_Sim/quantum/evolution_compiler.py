# ==============================================================================
# evolution_compiler.py - 2차 Trotter 시간 전개 연산자
# ==============================================================================
# 한 Trotter 스텝 (Δt = t/M):
#   S(Δt) = Π_{j=J..1} e^{-iω_j P_j Δt/2} · Π_{j=1..J} e^{-iω_j P_j Δt/2}
#   (j 는 |ω_j| 내림차순, 항등 항은 제외)
# U(t) ≈ S(Δt)^M,  회로에서 필요한 U(t)^{2^k} 는 반복 제곱으로 만듭니다.
#
# [경로]
# - gate_level     : 회전 게이트를 상태벡터에 하나씩 적용 (검증용)
# - compiled_dense : S 를 밀집 행렬로 컴파일한 뒤 거듭제곱
# - exact          : e^{-iHτ} 를 고유분해로 직접 계산 (Trotter 오차 없음)
# - auto           : 반복 횟수 M·2^{N_a-1} 이 임계값을 넘으면 compiled_dense
# ==============================================================================
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from hamiltonian.pauli_core import PauliSum, magnitude_order, realize_matrix
from quantum.statevector_engine import apply_pauli_rotation, apply_system_operator, check_unitary
from utils import NumericalGuardError, QpdeInputError, sim_setting

logger = logging.getLogger(__name__)

PATHS = ("gate_level", "compiled_dense", "exact", "auto")
ORDERINGS = ("magnitude", "input")
POWER_METHODS = ("squaring", "eigen")
POWER_METHOD_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EvolutionSpec:
    total_time: float
    steps: int
    ordering: str = "magnitude"
    path: str = "auto"
    power_method: str = "squaring"

    def __post_init__(self):
        if not self.total_time > 0:
            raise QpdeInputError(f"전개 시간 t 는 양수여야 합니다: {self.total_time}")
        if self.steps < 1:
            raise QpdeInputError(f"Trotter 스텝 수 M 은 1 이상이어야 합니다: {self.steps}")
        if self.ordering not in ORDERINGS:
            raise QpdeInputError(f"알 수 없는 항 순서: {self.ordering}")
        if self.path not in PATHS:
            raise QpdeInputError(f"알 수 없는 전개 경로: {self.path} (가능: {', '.join(PATHS)})")
        if self.power_method not in POWER_METHODS:
            raise QpdeInputError(f"알 수 없는 거듭제곱 방식: {self.power_method}")

    @property
    def dt(self) -> float:
        return self.total_time / self.steps

    @classmethod
    def from_dt(cls, total_time: float, dt: float, **kwargs) -> "EvolutionSpec":
        """t 와 Δt 로 만듭니다. t/Δt 가 정수가 아니면 오류."""
        if not dt > 0:
            raise QpdeInputError(f"Δt 는 양수여야 합니다: {dt}")
        steps = round(total_time / dt)
        if steps < 1 or abs(steps * dt - total_time) > 1e-9 * max(1.0, total_time):
            raise QpdeInputError(f"t={total_time} 가 Δt={dt} 의 정수배가 아닙니다.")
        return cls(total_time, steps, **kwargs)

    def with_path(self, path: str) -> "EvolutionSpec":
        return EvolutionSpec(self.total_time, self.steps, self.ordering, path, self.power_method)


@dataclass
class CompiledEvolution:
    """
    powers[k] = U(t)^{2^k}  (k = 0..N_a-1)

    step 은 compiled_dense 경로의 S(Δt), exact 경로에서는 None.
    """

    path: str
    powers: list
    step: np.ndarray | None = None
    factors: list = field(default_factory=list)


def trotter_factor_sequence(h: PauliSum, dt: float, ordering: str = "magnitude") -> list:
    """대칭 2차 스텝 한 번의 (PauliTerm, angle_scale) 목록. 항등 계수는 포함하지 않습니다."""
    if h.term_count == 0:
        raise QpdeInputError("항이 없는 해밀토니안은 Trotter 분해할 수 없습니다.")
    ordered = magnitude_order(h) if ordering == "magnitude" else list(h.terms)
    half = dt / 2.0
    return [(t, half) for t in ordered] + [(t, half) for t in reversed(ordered)]


def _guard_dense(n_qubits: int) -> None:
    limit = sim_setting("max_dense_qubits")
    if n_qubits > limit:
        raise NumericalGuardError(f"밀집 전개 크기 제한 초과: {n_qubits} 큐비트 > {limit}")


def compile_step(h: PauliSum, dt: float, ordering: str = "magnitude") -> np.ndarray:
    """
    S(Δt) 를 밀집 유니터리로 만듭니다.

    인자 하나마다 행 단위로 e^{-iθP} = cosθ I - i sinθ P 를 왼쪽에서 곱하므로
    인자당 O(dim²) 입니다.
    """
    n = h.qubit_count
    _guard_dense(n)
    dim = 1 << n
    step = np.eye(dim, dtype=complex)
    rows = np.arange(dim, dtype=np.int64)
    for term, scale in trotter_factor_sequence(h, dt, ordering):
        theta = term.coefficient * scale
        pair = rows ^ term.string.flip_mask
        _, phases = term.string.action(pair)
        step = math.cos(theta) * step - 1j * math.sin(theta) * phases[:, None] * step[pair, :]
    check_unitary(step, 1e-11 * dim)
    return step


def _unitary_power_eigen(matrix: np.ndarray, exponent: int) -> np.ndarray:
    eigenvalues, vectors = np.linalg.eig(matrix)
    scaled = vectors * eigenvalues**exponent
    return np.linalg.solve(vectors.T, scaled.T).T


def evolution_powers(step: np.ndarray, steps: int, n_ancilla: int, method: str = "squaring") -> list:
    """
    [S^{M·2^k} for k in 0..N_a-1].

    squaring: S^M 을 만든 뒤 제곱을 반복합니다.
    eigen:    S 를 고유분해해서 고윳값 거듭제곱으로 만듭니다.
              S^M 과 (N_a > 1 이면) S^{2M} 을 제곱 방식 값과 비교해
              최대 절대 차이가 1e-9 를 넘으면 NumericalGuardError.
    """
    if method == "eigen":
        powers = [_unitary_power_eigen(step, steps << k) for k in range(n_ancilla)]
        reference = np.linalg.matrix_power(step, steps)
        checks = [(0, reference)]
        if n_ancilla > 1:
            checks.append((1, reference @ reference))
        for k, expected in checks:
            difference = float(np.max(np.abs(powers[k] - expected)))
            if difference > POWER_METHOD_TOLERANCE:
                raise NumericalGuardError(
                    f"eigen 거듭제곱이 제곱 방식과 다릅니다 (k={k}, max |차이| = {difference:.3e})"
                )
    else:
        base = np.linalg.matrix_power(step, steps)
        powers = [base]
        for _ in range(1, n_ancilla):
            base = base @ base
            powers.append(base)
    for k, p in enumerate(powers):
        try:
            check_unitary(p, 1e-9)
        except NumericalGuardError as e:
            raise NumericalGuardError(f"U^(2^{k}) 계산 중 유니터리성 손실: {e}") from e
    return powers


def exact_evolution(h: PauliSum, tau: float) -> np.ndarray:
    """e^{-iHτ}. 항등 계수 C 를 포함합니다."""
    _guard_dense(h.qubit_count)
    energies, vectors = np.linalg.eigh(realize_matrix(h))
    return (vectors * np.exp(-1j * energies * tau)) @ vectors.conj().T


def exact_powers(h: PauliSum, total_time: float, n_ancilla: int) -> list:
    """[e^{-iH t 2^k} for k in 0..N_a-1]. 고유분해는 한 번만 합니다."""
    _guard_dense(h.qubit_count)
    energies, vectors = np.linalg.eigh(realize_matrix(h))
    return [
        (vectors * np.exp(-1j * energies * total_time * (1 << k))) @ vectors.conj().T
        for k in range(n_ancilla)
    ]


def resolve_path(evolution: EvolutionSpec, n_ancilla: int) -> str:
    if evolution.path != "auto":
        return evolution.path
    repetitions = evolution.steps * (1 << (n_ancilla - 1))
    chosen = "compiled_dense" if repetitions > sim_setting("compiled_threshold_repetitions") else "gate_level"
    logger.debug("auto 경로 선택: 반복 %d회 → %s", repetitions, chosen)
    return chosen


def compile_evolution(h: PauliSum, evolution: EvolutionSpec, n_ancilla: int) -> CompiledEvolution:
    """
    회로 실행용 전개 객체. h 는 항등 계수를 뺀 해밀토니안을 넘기는 것이 원칙입니다.
    """
    path = resolve_path(evolution, n_ancilla)
    if path == "exact":
        return CompiledEvolution(path, exact_powers(h, evolution.total_time, n_ancilla))
    factors = trotter_factor_sequence(h, evolution.dt, evolution.ordering)
    if path == "gate_level":
        return CompiledEvolution(path, [], None, factors)
    step = compile_step(h, evolution.dt, evolution.ordering)
    powers = evolution_powers(step, evolution.steps, n_ancilla, evolution.power_method)
    logger.info("전개 컴파일 완료: N_s=%d, M=%d, 거듭제곱 %d개", h.qubit_count, evolution.steps, len(powers))
    return CompiledEvolution(path, powers, step, factors)


def apply_evolution(
    state,
    compiled: CompiledEvolution,
    k: int,
    steps: int,
    control: tuple | None = None,
    workers: int | None = None,
):
    """
    U(t)^{2^k} 를 시스템 레지스터에 적용합니다 (control 은 (보조 큐비트, 값)).
    """
    if compiled.path == "gate_level":
        for _ in range(steps << k):
            for term, scale in compiled.factors:
                apply_pauli_rotation(state, term, scale, control, workers)
        return state
    return apply_system_operator(state, compiled.powers[k], control, check=False)


def effective_gaps(h: PauliSum, evolution: EvolutionSpec, initial: np.ndarray, finals) -> np.ndarray:
    """
    Trotter 유효 에너지 차 E(final) - E(initial) 를 finals 의 벡터마다 계산합니다.

    S(Δt)^M 의 고유벡터 중 각 입력 벡터와 겹침이 가장 큰 것을 찾아 고유위상 -arg(λ)/t 를 에너지로
    읽습니다. 결과는 (-π/t, π/t] 로 접습니다. 읽어내기 해상도와 무관한 Trotter 이동을 보는 용도입니다.
    """
    t = evolution.total_time
    if evolution.path == "exact":
        unitary = exact_evolution(h.without_identity(), t)
    else:
        step = compile_step(h.without_identity(), evolution.dt, evolution.ordering)
        unitary = np.linalg.matrix_power(step, evolution.steps)
    eigenvalues, vectors = np.linalg.eig(unitary)

    def _phase_of(v: np.ndarray) -> float:
        overlaps = np.abs(vectors.conj().T @ v)
        return float(np.angle(eigenvalues[int(np.argmax(overlaps))]))

    period = 2.0 * math.pi / t
    base = _phase_of(initial)
    gaps = np.array([-(_phase_of(v) - base) / t for v in finals])
    return gaps - period * np.round(gaps / period)
