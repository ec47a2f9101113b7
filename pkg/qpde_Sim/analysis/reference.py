# ==============================================================================
# reference.py - 정확 대각화 기준값 (full-CI / CAS-CI 오라클)
# ==============================================================================
# - reference_spectrum: 큐비트 해밀토니안을 밀집 대각화하고 N, S_z, S² 라벨을 붙입니다.
#   H 가 N, S_z 와 교환하면 점유 기저의 (N, S_z) 블록마다 따로 대각화해서
#   축퇴된 고유벡터가 섹터를 섞지 않도록 합니다.
# - label_states: S0, S1, ... / T1, T2, ... 상태 이름
# - spectral_decomposition: c_j = ⟨Ψ_j|Φ⟩
# ==============================================================================
import logging
from dataclasses import dataclass, field

import numpy as np

from hamiltonian.fermion_hamiltonian import jordan_wigner, sector_indices, spin_operators
from hamiltonian.pauli_core import PauliSum, realize_matrix
from utils import NumericalGuardError, get_sim_config, sim_setting

logger = logging.getLogger(__name__)

MULTIPLICITY_LETTERS = {1: "S", 2: "D", 3: "T", 4: "Q"}


@dataclass
class SpectrumReference:
    energies: np.ndarray
    vectors: np.ndarray
    particle_numbers: np.ndarray
    sz: np.ndarray
    s_squared: np.ndarray
    labels: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.energies)

    def energy_of(self, label: str) -> float:
        for name, energy in zip(self.labels, self.energies):
            if name == label:
                return float(energy)
        raise KeyError(f"상태 라벨을 찾을 수 없습니다: {label}")

    def gap(self, upper: str, lower: str) -> float:
        return self.energy_of(upper) - self.energy_of(lower)

    def residuals(self, h: PauliSum) -> np.ndarray:
        matrix = realize_matrix(h)
        return np.linalg.norm(matrix @ self.vectors - self.vectors * self.energies, axis=0)


@dataclass
class SpectralDecomposition:
    overlaps: np.ndarray
    energies: np.ndarray
    labels: list

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.overlaps) ** 2

    def support(self, tolerance: float = 1e-8) -> list:
        """가중치가 tolerance 를 넘는 상태 인덱스 (가중치 내림차순)."""
        idx = np.flatnonzero(self.weights > tolerance)
        return sorted(idx.tolist(), key=lambda j: -self.weights[j])


def _sector_matrices(n_qubits: int):
    if n_qubits % 2:
        return None
    n_op, sz_op, s2_op = spin_operators(n_qubits // 2)
    return tuple(realize_matrix(jordan_wigner(op, n_qubits)) for op in (n_op, sz_op, s2_op))


def _block_eigh(matrix: np.ndarray, n_qubits: int):
    dim = matrix.shape[0]
    energies, vectors = [], []
    for n_el in range(n_qubits + 1):
        for twice_sz in range(-n_el, n_el + 1, 2):
            idx = sector_indices(n_qubits, n_el, twice_sz / 2)
            if idx.size == 0:
                continue
            w, v = np.linalg.eigh(matrix[np.ix_(idx, idx)])
            full = np.zeros((dim, idx.size), dtype=complex)
            full[idx, :] = v
            energies.append(w)
            vectors.append(full)
    energies = np.concatenate(energies)
    vectors = np.concatenate(vectors, axis=1)
    order = np.argsort(energies, kind="stable")
    return energies[order], vectors[:, order]


def reference_spectrum(h: PauliSum, sector: tuple | None = None) -> SpectrumReference:
    """
    밀집 대각화 + 섹터 필터.

    sector = (전자 수, S_z) 이고 둘 중 하나는 None 일 수 있습니다.
    큐비트 수가 홀수이면 N/S_z/S² 라벨은 NaN 입니다.
    """
    n = h.qubit_count
    limit = sim_setting("max_dense_qubits")
    if n > limit:
        raise NumericalGuardError(f"기준 대각화 크기 제한 초과: {n} 큐비트 > {limit}")

    matrix = realize_matrix(h)
    ops = _sector_matrices(n)
    conserving = ops is not None and all(
        np.max(np.abs(matrix @ op - op @ matrix)) < 1e-10 for op in ops[:2]
    )
    if conserving:
        energies, vectors = _block_eigh(matrix, n)
    else:
        energies, vectors = np.linalg.eigh(matrix)

    if ops is not None:
        expect = [np.real(np.einsum("ij,ik,kj->j", vectors.conj(), op, vectors)) for op in ops]
    else:
        expect = [np.full(len(energies), np.nan)] * 3
    particle_numbers, sz, s_squared = expect

    keep = np.ones(len(energies), dtype=bool)
    if sector is not None:
        tol = get_sim_config()["analysis"]["sector_tolerance"]
        n_el, want_sz = sector
        if n_el is not None:
            keep &= np.abs(particle_numbers - n_el) < tol
        if want_sz is not None:
            keep &= np.abs(sz - want_sz) < tol

    ref = SpectrumReference(energies[keep], vectors[:, keep], particle_numbers[keep], sz[keep], s_squared[keep])
    ref.labels = label_states(ref)
    logger.info("기준 스펙트럼: %d개 상태 (sector=%s)", len(ref), sector)
    return ref


def label_states(ref: SpectrumReference, tolerance: float = 1e-6) -> list:
    """
    전자 수 섹터마다 에너지 순으로 S0, S1, ... (⟨S²⟩≈0), T1, T2, ... (⟨S²⟩≈2) 등을 붙입니다.
    같은 다중항의 S_z 성분(같은 에너지, 같은 S²)은 같은 이름을 받습니다.
    """
    if np.all(np.isnan(ref.s_squared)):
        return [f"E{j}" for j in range(len(ref))]

    labels = [""] * len(ref)
    counters: dict = {}
    last_energy: dict = {}
    for j in np.argsort(ref.energies, kind="stable"):
        s = (-1.0 + np.sqrt(1.0 + 4.0 * max(ref.s_squared[j], 0.0))) / 2.0
        multiplicity = int(round(2 * s + 1))
        letter = MULTIPLICITY_LETTERS.get(multiplicity, f"M{multiplicity}_")
        key = (int(round(ref.particle_numbers[j])), multiplicity)
        previous = last_energy.get(key)
        if previous is None or abs(ref.energies[j] - previous[0]) > tolerance:
            start = 0 if multiplicity in (1, 2) else 1
            counters[key] = counters.get(key, start - 1) + 1
            last_energy[key] = (ref.energies[j], f"{letter}{counters[key]}")
        labels[j] = last_energy[key][1]
    return labels


def spectral_decomposition(ref: SpectrumReference, spec) -> SpectralDecomposition:
    """spec 은 SuperpositionSpec 또는 상태벡터."""
    vector = spec.statevector() if hasattr(spec, "statevector") else np.asarray(spec, dtype=complex)
    if vector.shape[0] != ref.vectors.shape[0]:
        raise ValueError(f"상태 차원 {vector.shape[0]} 가 기준 스펙트럼 차원 {ref.vectors.shape[0]} 와 다릅니다.")
    return SpectralDecomposition(ref.vectors.conj().T @ vector, ref.energies.copy(), list(ref.labels))


def candidate_gaps(ref: SpectrumReference, phi0=None, phi1=None, tolerance: float = 1e-8) -> dict:
    """
    {"T1-S0": E_k - E_j} 형태의 기준 간격.

    phi0/phi1 이 주어지면 각 입력이 겹치는 상태 쌍만, 아니면 모든 라벨 쌍을 씁니다.
    """
    if phi0 is not None and phi1 is not None:
        lower = spectral_decomposition(ref, phi0).support(tolerance)
        upper = spectral_decomposition(ref, phi1).support(tolerance)
    else:
        lower = upper = list(range(len(ref)))
    gaps = {}
    for k in upper:
        for j in lower:
            name = f"{ref.labels[k]}-{ref.labels[j]}"
            if ref.labels[k] != ref.labels[j] and name not in gaps:
                gaps[name] = float(ref.energies[k] - ref.energies[j])
    return gaps
