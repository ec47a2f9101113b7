# ==============================================================================
# pauli_core.py - 파울리 문자열 대수와 큐비트 해밀토니안 표현
# ==============================================================================
# 큐비트 해밀토니안 H = C·I + Σ_j ω_j P_j 를 다룹니다.
#
# [레지스터 순서 규약]
# - 문자열 "XZIY" 에서 가장 왼쪽 글자가 큐비트 0 입니다.
# - n 큐비트 레지스터에서 큐비트 q 는 기저 인덱스의 (n-1-q) 번째 비트입니다.
#   즉 큐비트 0 이 최상위 비트이고, 밀집 행렬은 큐비트 0 부터 차례로
#   크로네커 곱을 한 것과 같습니다.
# ==============================================================================
import logging
import math
from dataclasses import dataclass

import numpy as np

from utils import NumericalGuardError, QpdeInputError, sim_setting

logger = logging.getLogger(__name__)

PAULI_AXES = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, order=True)
class PauliString:
    """큐비트별 {I, X, Y, Z} 의 직접곱. 길이는 생성 시 고정됩니다."""

    axes: str

    def __post_init__(self):
        if not self.axes:
            raise QpdeInputError("파울리 문자열은 최소 1개 큐비트가 필요합니다.")
        bad = set(self.axes) - set(PAULI_AXES)
        if bad:
            raise QpdeInputError(f"파울리 문자열에 허용되지 않는 문자가 있습니다: {''.join(sorted(bad))}")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls("I" * n_qubits)

    @classmethod
    def from_sparse(cls, n_qubits: int, ops: dict) -> "PauliString":
        """{큐비트: 'X'} 형태에서 문자열을 만듭니다."""
        axes = ["I"] * n_qubits
        for q, a in ops.items():
            axes[q] = a
        return cls("".join(axes))

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) == {"I"}

    def _mask(self, letters: str) -> int:
        n = self.n_qubits
        mask = 0
        for q, a in enumerate(self.axes):
            if a in letters:
                mask |= 1 << (n - 1 - q)
        return mask

    @property
    def flip_mask(self) -> int:
        return self._mask("XY")

    @property
    def sign_mask(self) -> int:
        return self._mask("YZ")

    @property
    def y_count(self) -> int:
        return self.axes.count("Y")

    def action(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """
        P|b⟩ = phase(b)|b ⊕ flip⟩ 에서 (b ⊕ flip, phase(b)) 를 돌려줍니다.

        phase(b) = i^{#Y} · (-1)^{popcount(b & (Y|Z 마스크))}
        """
        indices = np.asarray(indices, dtype=np.int64)
        parity = np.bitwise_count(indices & self.sign_mask) & 1
        phases = (1j ** self.y_count) * (1 - 2 * parity.astype(np.float64))
        return indices ^ self.flip_mask, phases

    def permuted(self, perm: list[int]) -> "PauliString":
        """큐비트 q 를 perm[q] 로 옮긴 문자열."""
        axes = ["I"] * self.n_qubits
        for q, a in enumerate(self.axes):
            axes[perm[q]] = a
        return PauliString("".join(axes))

    def __str__(self) -> str:
        return self.axes


@dataclass(frozen=True)
class PauliTerm:
    string: PauliString
    coefficient: float

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise QpdeInputError(f"계수가 유한하지 않습니다: {self.string} → {self.coefficient}")

    @classmethod
    def parse(cls, axes: str, coefficient: float) -> "PauliTerm":
        return cls(PauliString(axes), float(coefficient))


@dataclass(frozen=True)
class PauliSum:
    """
    실수 계수 파울리 항들의 합. 항등 항의 계수 C 는 따로 보관합니다.

    생성은 merge_terms() 를 통해서 하는 것이 원칙입니다.
    """

    terms: tuple
    qubit_count: int
    identity_coefficient: float = 0.0

    def __post_init__(self):
        seen = set()
        for term in self.terms:
            if term.string.n_qubits != self.qubit_count:
                raise QpdeInputError(
                    f"파울리 문자열 길이가 일치하지 않습니다: {term.string} (기대값 {self.qubit_count})"
                )
            if term.string.is_identity:
                raise QpdeInputError("항등 항은 identity_coefficient 로 분리되어야 합니다.")
            if term.string in seen:
                raise QpdeInputError(f"중복된 파울리 문자열: {term.string}")
            seen.add(term.string)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    def coefficient_of(self, axes: str) -> float:
        if set(axes) == {"I"}:
            return self.identity_coefficient
        for term in self.terms:
            if term.string.axes == axes:
                return term.coefficient
        return 0.0

    def without_identity(self) -> "PauliSum":
        return PauliSum(self.terms, self.qubit_count, 0.0)

    def permuted(self, perm: list[int]) -> "PauliSum":
        return PauliSum(
            tuple(PauliTerm(t.string.permuted(perm), t.coefficient) for t in self.terms),
            self.qubit_count,
            self.identity_coefficient,
        )

    def to_text(self) -> str:
        """CLI 덤프용 텍스트. 한 줄에 '계수 문자열'."""
        lines = [f"{self.identity_coefficient:+.15e} {'I' * self.qubit_count}"]
        lines += [f"{t.coefficient:+.15e} {t.string}" for t in magnitude_order(self)]
        return "\n".join(lines) + "\n"


def merge_terms(raw, prune_tolerance: float | None = None, qubit_count: int | None = None) -> PauliSum:
    """
    같은 문자열의 계수를 더하고, |계수| < prune_tolerance 인 항을 버리고,
    항등 항은 identity_coefficient 로 옮깁니다.

    Args:
        raw: PauliTerm 목록
        prune_tolerance: 기본값은 config.ini [SIMULATION] prune_tolerance
        qubit_count: raw 가 비어 있을 때 사용할 큐비트 수
    """
    if prune_tolerance is None:
        prune_tolerance = sim_setting("prune_tolerance")

    raw = list(raw)
    lengths = {t.string.n_qubits for t in raw}
    if qubit_count is not None:
        lengths.add(qubit_count)
    if len(lengths) > 1:
        raise QpdeInputError(f"파울리 문자열 길이가 섞여 있습니다: {sorted(lengths)}")
    if not lengths:
        raise QpdeInputError("빈 항 목록에는 qubit_count 를 지정해야 합니다.")
    n_qubits = lengths.pop()

    merged: dict = {}
    identity = 0.0
    for term in raw:
        if term.string.is_identity:
            identity += term.coefficient
            continue
        merged[term.string] = merged.get(term.string, 0.0) + term.coefficient

    kept = tuple(PauliTerm(s, c) for s, c in merged.items() if abs(c) >= prune_tolerance)
    dropped = len(merged) - len(kept)
    if dropped:
        logger.debug("prune: %d개 항 제거 (tol=%g)", dropped, prune_tolerance)
    return PauliSum(kept, n_qubits, identity)


def magnitude_order(pauli_sum: PauliSum) -> list:
    """|ω_j| 내림차순, 같은 크기는 축 문자열 사전순(I<X<Y<Z)."""
    return sorted(pauli_sum.terms, key=lambda t: (-abs(t.coefficient), t.string.axes))


def realize_matrix(pauli_sum: PauliSum) -> np.ndarray:
    """
    C·I + Σ_j ω_j P_j 를 2^n × 2^n 밀집 에르미트 행렬로 만듭니다.
    """
    n = pauli_sum.qubit_count
    limit = sim_setting("max_realize_qubits")
    if n > limit:
        raise NumericalGuardError(f"밀집 행렬 크기 제한 초과: {n} 큐비트 > {limit}")

    dim = 1 << n
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[np.diag_indices(dim)] = pauli_sum.identity_coefficient
    columns = np.arange(dim, dtype=np.int64)
    for term in pauli_sum.terms:
        rows, phases = term.string.action(columns)
        matrix[rows, columns] += term.coefficient * phases
    return matrix


def pauli_matrix(string: PauliString) -> np.ndarray:
    """문자열 하나의 밀집 행렬 (크로네커 곱, 큐비트 0 이 가장 왼쪽)."""
    out = np.array([[1.0 + 0j]])
    for a in string.axes:
        out = np.kron(out, PAULI_MATRICES[a])
    return out
