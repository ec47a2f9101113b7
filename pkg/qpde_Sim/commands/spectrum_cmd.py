# ==============================================================================
# spectrum_cmd.py - 'spectrum' 명령: 정확 대각화 기준 스펙트럼 덤프
# ==============================================================================
# 출력 파일
# - spectrum.csv : 섹터 필터를 통과한 고유값 (Hartree/eV) 과 N, S_z, ⟨S²⟩, 라벨
# - gaps.csv     : 라벨이 다른 상태 쌍의 에너지 차 (위 - 아래)
# ==============================================================================
import pandas as pd

from analysis.reference import SpectrumReference, reference_spectrum
from data_manager import RunManifest, load_qubit_hamiltonian
from utils import QpdeInputError, hartree_to_ev, write_csv


def spectrum_table(ref: SpectrumReference, residuals=None) -> pd.DataFrame:
    df = pd.DataFrame(
        {
            "index": range(len(ref)),
            "label": ref.labels,
            "energy_hartree": ref.energies,
            "energy_ev": hartree_to_ev(ref.energies),
            "n_electrons": ref.particle_numbers,
            "sz": ref.sz,
            "s_squared": ref.s_squared,
        }
    )
    if residuals is not None:
        df["residual"] = residuals
    return df


def gap_table(ref: SpectrumReference) -> pd.DataFrame:
    """라벨별 대표 상태(가장 먼저 나온 성분) 사이의 모든 쌍별 간격."""
    representatives = {}
    for label, energy in zip(ref.labels, ref.energies):
        representatives.setdefault(label, float(energy))
    names = sorted(representatives, key=lambda k: (representatives[k], k))
    rows = []
    for i, lower in enumerate(names):
        for upper in names[i + 1:]:
            gap = representatives[upper] - representatives[lower]
            rows.append(
                {
                    "gap": f"{upper}-{lower}",
                    "upper": upper,
                    "lower": lower,
                    "gap_hartree": gap,
                    "gap_ev": hartree_to_ev(gap),
                }
            )
    return pd.DataFrame(rows, columns=["gap", "upper", "lower", "gap_hartree", "gap_ev"])


def run(manifest: RunManifest, options=None) -> list:
    """spectrum 명령 실행. 작성한 파일 경로 목록을 돌려줍니다."""
    if manifest.fcidump is None:
        raise QpdeInputError("spectrum 에는 manifest 의 fcidump 가 필요합니다.")
    print(f"--- 기준 스펙트럼 계산: {manifest.fcidump} ---")
    h = load_qubit_hamiltonian(manifest.fcidump)
    ref = reference_spectrum(h, manifest.sector)
    print(f"{h.qubit_count} 큐비트, {h.term_count} 항 → 섹터 {manifest.sector} 에서 {len(ref)}개 상태")

    paths = [
        write_csv(manifest.output_path("spectrum.csv"), spectrum_table(ref, ref.residuals(h))),
        write_csv(manifest.output_path("gaps.csv"), gap_table(ref)),
    ]
    print(f"스펙트럼 저장 완료: {', '.join(paths)}")
    return paths
