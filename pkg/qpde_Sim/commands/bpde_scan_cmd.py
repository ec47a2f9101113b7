# ==============================================================================
# bpde_scan_cmd.py - 'bpde-scan' 명령: 단일 보조 큐비트 Prob(0) 격자 스캔
# ==============================================================================
# manifest 의 "scan" 항목:
#   {"estimator": "bpde" | "bpe", "start": -0.5, "stop": 0.5, "points": 200,
#    "total_time": 10.0}
# - 회로 곡선(bpde_prob0 / bpe_prob0)과 기준 스펙트럼 분해로 만든 해석 곡선을
#   같은 격자에서 계산해 bpde_scan.csv 에 씁니다.
# - 요약(bpde_scan.json): 최대 점별 차이, 곡선 최대 위치, 격자 안의 기준 간격,
#   최대값이 격자 끝에 있으면(격자가 참값을 빠뜨림) edge_peak=True.
# - 전개 경로가 gate/compiled 로 지정되면 첫 dt 의 Trotter 전개를, 그 외에는 정확 전개를 씁니다.
# ==============================================================================
import numpy as np
import pandas as pd

from analysis.reference import candidate_gaps, reference_spectrum, spectral_decomposition
from data_manager import RunManifest, load_run_inputs
from quantum.qpde_circuits import bpde_formula, bpde_prob0, bpe_formula, bpe_prob0
from utils import QpdeInputError, hartree_to_ev, write_csv, write_json

ESTIMATORS = ("bpde", "bpe")


def scan_grid(scan: dict) -> np.ndarray:
    points = int(scan.get("points", 200))
    if points < 2:
        raise QpdeInputError(f"scan.points 는 2 이상이어야 합니다: {points}")
    start, stop = float(scan.get("start", -0.5)), float(scan.get("stop", 0.5))
    if not stop > start:
        raise QpdeInputError(f"scan 범위가 잘못되었습니다: start={start}, stop={stop}")
    return np.linspace(start, stop, points)


def _is_monotone(values: np.ndarray) -> bool:
    steps = np.diff(values)
    return bool(np.all(steps >= -1e-12) or np.all(steps <= 1e-12))


def run(manifest: RunManifest, options=None) -> list:
    scan = manifest.scan
    estimator = scan.get("estimator", "bpde")
    if estimator not in ESTIMATORS:
        raise QpdeInputError(f"알 수 없는 scan.estimator: {estimator} (가능: {', '.join(ESTIMATORS)})")
    t = float(scan.get("total_time", manifest.total_time))
    grid = scan_grid(scan)
    evolution = None
    if manifest.path in ("gate_level", "compiled_dense"):
        evolution = manifest.evolution(manifest.dts[0]).with_path("compiled_dense")

    inputs = load_run_inputs(manifest)
    if inputs.phi0 is None or (estimator == "bpde" and inputs.phi1 is None):
        raise QpdeInputError(f"{estimator} 스캔에 필요한 상태 스펙(phi0/phi1)이 manifest 에 없습니다.")
    h = inputs.hamiltonian
    print(f"--- {estimator} 스캔: 격자 {len(grid)}점, t={t:g}, 전개={'Trotter' if evolution else '정확'} ---")

    ref = reference_spectrum(h)
    c = spectral_decomposition(ref, inputs.phi0)
    if estimator == "bpe":
        circuit = bpe_prob0(h, inputs.phi0, grid, t, evolution)
        formula = bpe_formula(c.weights, ref.energies, grid, t)
        targets = {ref.labels[j]: float(ref.energies[j]) for j in c.support()}
    else:
        d = spectral_decomposition(ref, inputs.phi1)
        circuit = bpde_prob0(h, inputs.phi0, inputs.phi1, grid, t, evolution)
        formula = bpde_formula(c.weights, d.weights, ref.energies, grid, t)
        targets = candidate_gaps(ref, inputs.phi0, inputs.phi1)

    difference = circuit - formula
    peak = int(np.argmax(circuit))
    summary = {
        "estimator": estimator,
        "total_time": t,
        "points": len(grid),
        "trotter": evolution is not None,
        "max_abs_difference": float(np.max(np.abs(difference))),
        "peak_value": float(grid[peak]),
        "peak_value_ev": float(hartree_to_ev(grid[peak])),
        "peak_prob0": float(circuit[peak]),
        "edge_peak": peak in (0, len(grid) - 1),
        "monotone": _is_monotone(circuit),
        "oracle_targets": targets,
        "targets_in_grid": sorted(k for k, v in targets.items() if grid[0] <= v <= grid[-1]),
    }
    if summary["edge_peak"]:
        print("경고: 최대값이 격자 끝에 있습니다. 참값이 격자 밖에 있을 수 있습니다.")

    table = pd.DataFrame(
        {"value_hartree": grid, "prob0_circuit": circuit, "prob0_formula": formula, "difference": difference}
    )
    paths = [
        write_csv(manifest.output_path(f"{estimator}_scan.csv"), table),
        write_json(manifest.output_path(f"{estimator}_scan.json"), summary),
    ]
    print(f"스캔 완료: 최대 |회로 - 해석식| = {summary['max_abs_difference']:.3e}, 최대 위치 {grid[peak]:.6f} Hartree")
    return paths
