# ==============================================================================
# decoding.py - 보조 레지스터 측정값 → 위상차 → 에너지 간격
# ==============================================================================
# [부호 규칙]
#   Δφ = y / 2^{N_a}
#   Δφ ≤ 1/4 → Δφ' = Δφ,   Δφ ≥ 3/4 → Δφ' = Δφ - 1,   그 사이 → 모호(오류)
#   ΔE = -2π Δφ' / t
# 모호 구간은 t 가 간격에 비해 너무 크다는 뜻입니다 (t 를 줄여야 함).
# ==============================================================================
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from utils import PhaseAmbiguityError, QpdeInputError, format_bitstring, hartree_to_ev, get_sim_config

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "bin",
    "bitstring",
    "mass",
    "delta_phi",
    "delta_E_hartree",
    "delta_E_ev",
    "nearest_oracle_gap",
    "deviation",
    "resolution",
    "ambiguous",
    "label",
]


@dataclass(frozen=True)
class PhaseReading:
    y: int
    n_ancilla: int

    def __post_init__(self):
        if not 0 <= self.y < (1 << self.n_ancilla):
            raise QpdeInputError(f"bin 인덱스 {self.y} 가 범위(0..2^{self.n_ancilla}-1)를 벗어났습니다.")

    @property
    def delta_phi(self) -> float:
        return self.y / (1 << self.n_ancilla)

    @property
    def bits(self) -> str:
        return format_bitstring(self.y, self.n_ancilla)


@dataclass(frozen=True)
class GapEstimate:
    delta_e: float
    bin: int
    delta_phi: float
    resolution: float
    ambiguous: bool = False


def bin_resolution(n_ancilla: int, t: float) -> float:
    """한 bin 의 에너지 폭 2π / (2^{N_a} t)."""
    return 2.0 * math.pi / ((1 << n_ancilla) * t)


def _check_time(t: float) -> None:
    if not t > 0:
        raise QpdeInputError(f"전개 시간 t 는 양수여야 합니다: {t}")


def phase_aliases(y: int, n_ancilla: int, t: float) -> tuple[float, float]:
    """Δφ 와 Δφ-1 두 해석의 ΔE."""
    _check_time(t)
    phi = PhaseReading(y, n_ancilla).delta_phi
    return -2.0 * math.pi * phi / t, -2.0 * math.pi * (phi - 1.0) / t


def decode_phase(y: int, n_ancilla: int, t: float) -> GapEstimate:
    _check_time(t)
    reading = PhaseReading(y, n_ancilla)
    phi = reading.delta_phi
    if phi <= 0.25:
        shifted = phi
    elif phi >= 0.75:
        shifted = phi - 1.0
    else:
        raise PhaseAmbiguityError(
            f"Δφ = {phi:.6f} 가 (1/4, 3/4) 구간에 있어 간격의 부호를 정할 수 없습니다. "
            f"전개 시간 t={t:g} 를 줄여서 다시 실행하세요."
        )
    return GapEstimate(-2.0 * math.pi * shifted / t, y, phi, bin_resolution(n_ancilla, t))


def decode_total_energy(y: int, n_ancilla: int, t: float, identity_coefficient: float = 0.0) -> float:
    """QPE 총 에너지: φ > 1/2 이면 φ-1 을 쓰고 E = -2πφ'/t + C."""
    _check_time(t)
    phi = PhaseReading(y, n_ancilla).delta_phi
    shifted = phi - 1.0 if phi > 0.5 else phi
    return -2.0 * math.pi * shifted / t + identity_coefficient


@dataclass(frozen=True)
class Peak:
    bin: int
    mass: float
    peak_probability: float


def find_peaks(dist, min_mass: float | None = None, window: int | None = None) -> list:
    """
    원형 bin 인덱스의 국소 최대값 중 ±window 이웃 질량 합이 min_mass 이상인 것.
    질량 내림차순, 같으면 bin 오름차순.

    이웃 구간이 겹치면 각 bin 은 한 피크에만 속합니다: 국소 최대 bin 은 자기 자신에,
    나머지 bin 은 확률이 더 큰 피크(같으면 작은 bin)에 먼저 배정됩니다.
    """
    analysis = get_sim_config()["analysis"]
    min_mass = analysis["min_peak_mass"] if min_mass is None else min_mass
    window = analysis["peak_window"] if window is None else window
    if not 0.0 < min_mass < 1.0:
        raise QpdeInputError(f"min_mass 는 (0, 1) 범위여야 합니다: {min_mass}")

    p = np.asarray(dist.probabilities)
    size = p.size
    left, right = np.roll(p, 1), np.roll(p, -1)
    maxima = sorted(np.flatnonzero((p > left) & (p >= right)).tolist(), key=lambda y: (-p[y], y))

    owner = np.full(size, -1, dtype=np.int64)
    owner[maxima] = maxima
    for y in maxima:
        for shift in range(-window, window + 1):
            b = (y + shift) % size
            if owner[b] < 0:
                owner[b] = y

    peaks = []
    for y in maxima:
        mass = float(p[owner == y].sum())
        if mass >= min_mass:
            peaks.append(Peak(int(y), mass, float(p[y])))
    return sorted(peaks, key=lambda pk: (-pk.mass, pk.bin))


def _nearest(value: float, candidates: dict) -> tuple:
    if not candidates:
        return None, math.nan
    label = min(candidates, key=lambda k: (abs(candidates[k] - value), k))
    return label, candidates[label]


def gap_report(
    dist,
    n_ancilla: int,
    t: float,
    oracle_gaps: dict | None = None,
    min_mass: float | None = None,
) -> pd.DataFrame:
    """
    피크마다 해석한 ΔE, 가장 가까운 기준 간격, 편차를 표로 만듭니다.

    oracle_gaps 는 {"T1-S0": ΔE, ...}. 모호 구간 피크는 두 해석 중 기준 간격에
    더 가까운 쪽을 쓰고 ambiguous=True 로 표시합니다 (기준이 없으면 Δφ 해석).
    """
    _check_time(t)
    oracle_gaps = oracle_gaps or {}
    resolution = bin_resolution(n_ancilla, t)
    rows = []
    for peak in find_peaks(dist, min_mass):
        ambiguous = False
        try:
            delta_e = decode_phase(peak.bin, n_ancilla, t).delta_e
        except PhaseAmbiguityError:
            ambiguous = True
            aliases = phase_aliases(peak.bin, n_ancilla, t)
            delta_e = aliases[0]
            if oracle_gaps:
                delta_e = min(aliases, key=lambda e: abs(_nearest(e, oracle_gaps)[1] - e))
            logger.warning("bin %d 는 모호 구간입니다. ΔE=%.6f 로 해석합니다.", peak.bin, delta_e)
        label, nearest = _nearest(delta_e, oracle_gaps)
        rows.append(
            {
                "bin": peak.bin,
                "bitstring": format_bitstring(peak.bin, n_ancilla),
                "mass": peak.mass,
                "delta_phi": peak.bin / (1 << n_ancilla),
                "delta_E_hartree": delta_e,
                "delta_E_ev": hartree_to_ev(delta_e),
                "nearest_oracle_gap": nearest,
                "deviation": delta_e - nearest if label is not None else math.nan,
                "resolution": resolution,
                "ambiguous": ambiguous,
                "label": label if label is not None else "",
            }
        )
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
