# ==============================================================================
# qpde_cmd.py - 'qpde' / 'qpe' / 'qpde-naive' 명령
# ==============================================================================
# [실행 흐름]
# 1. manifest 의 FCIDUMP 와 상태 스펙을 읽고 기준 스펙트럼(오라클)을 계산합니다.
# 2. dt 마다 회로를 실행합니다 (exact 경로는 dt 와 무관하므로 한 번만).
#    dt 가 여러 개이면 --workers 개의 스레드로 나눠 실행합니다.
# 3. dt 마다 분포 JSON 과 보고서 CSV 를 쓰고, 전체 요약 CSV 를 씁니다.
#    - qpde / qpde-naive : 피크별 ΔE 와 가장 가까운 기준 간격 (gap_report)
#    - qpe               : 피크별 총 에너지와 가장 가까운 기준 고유값
#    - qpde-naive        : 같은 설정의 qpde 분포와의 total variation 거리를 함께 기록
# 4. --single-shot 이면 seed 로 비트열 하나를 뽑아 해석 결과를 JSON 에 넣습니다.
#    뽑힌 값이 모호 구간이면 파일을 쓴 뒤 PhaseAmbiguityError 를 냅니다.
# ==============================================================================
import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime

import pandas as pd

from analysis.decoding import bin_resolution, decode_phase, decode_total_energy, find_peaks, gap_report
from analysis.reference import SpectrumReference, candidate_gaps, reference_spectrum, spectral_decomposition
from data_manager import RunInputs, RunManifest, load_run_inputs
from quantum.evolution_compiler import EvolutionSpec
from quantum.qpde_circuits import CircuitRunConfig, run_circuit, run_payload
from quantum.statevector_engine import OutcomeDistribution, RegisterLayout, sample_outcome
from utils import PhaseAmbiguityError, QpdeInputError, format_bitstring, hartree_to_ev, sim_setting, write_csv, write_json

CLI_MODES = {"qpde": "qpde", "qpe": "qpe", "qpde-naive": "qpde_naive"}

ENERGY_COLUMNS = [
    "bin",
    "bitstring",
    "mass",
    "phi",
    "energy_hartree",
    "energy_ev",
    "nearest_oracle_energy",
    "deviation",
    "resolution",
    "label",
]


@dataclass
class DtRun:
    label: str
    dt: float | None
    config: CircuitRunConfig
    distribution: OutcomeDistribution
    elapsed: float


def planned_evolutions(manifest: RunManifest) -> list:
    """(이름, dt, EvolutionSpec) 목록. exact 경로는 항목 하나."""
    if manifest.path == "exact":
        exact = EvolutionSpec(manifest.total_time, 1, manifest.ordering, "exact", manifest.power_method)
        return [("exact", None, exact)]
    return [(f"dt{dt:g}", dt, manifest.evolution(dt)) for dt in manifest.dts]


def _worker_count(options) -> int:
    workers = getattr(options, "workers", None)
    return int(workers) if workers else sim_setting("workers")


def run_distributions(manifest: RunManifest, inputs: RunInputs, mode: str, workers: int = 1) -> list:
    if inputs.phi0 is None:
        raise QpdeInputError("manifest 에 phi0 상태 스펙이 필요합니다.")
    layout = RegisterLayout(manifest.n_ancilla, inputs.hamiltonian.qubit_count)
    phi1 = inputs.phi1 if mode != "qpe" else None

    def _one(plan) -> DtRun:
        label, dt, evolution = plan
        config = CircuitRunConfig(inputs.hamiltonian, layout, evolution, inputs.phi0, phi1, mode)
        print(f"[{mode}] {label} 실행 시작 (경로: {config.resolved_path}, N_a={layout.n_ancilla}, N_s={layout.n_system})")
        start = time.perf_counter()
        dist = run_circuit(config)
        elapsed = time.perf_counter() - start
        print(f"[{mode}] {label} 완료 ({elapsed:.2f}초)")
        return DtRun(label, dt, config, dist, elapsed)

    plans = planned_evolutions(manifest)
    if workers > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one, plans))
    return [_one(plan) for plan in plans]


def oracle_reference(inputs: RunInputs) -> SpectrumReference:
    """입력 상태와 같은 전자 수 섹터의 기준 스펙트럼."""
    return reference_spectrum(inputs.hamiltonian, (inputs.phi0.n_electrons, None))


def energy_report(dist: OutcomeDistribution, n_ancilla: int, t: float, identity_coefficient: float, oracle: dict) -> pd.DataFrame:
    """QPE 피크별 총 에너지. oracle 은 {라벨: 고유값}."""
    rows = []
    for peak in find_peaks(dist):
        energy = decode_total_energy(peak.bin, n_ancilla, t, identity_coefficient)
        label = min(oracle, key=lambda k: (abs(oracle[k] - energy), k)) if oracle else ""
        nearest = oracle[label] if oracle else math.nan
        rows.append(
            {
                "bin": peak.bin,
                "bitstring": format_bitstring(peak.bin, n_ancilla),
                "mass": peak.mass,
                "phi": peak.bin / (1 << n_ancilla),
                "energy_hartree": energy,
                "energy_ev": hartree_to_ev(energy),
                "nearest_oracle_energy": nearest,
                "deviation": energy - nearest,
                "resolution": bin_resolution(n_ancilla, t),
                "label": label,
            }
        )
    return pd.DataFrame(rows, columns=ENERGY_COLUMNS)


def eigenvalue_oracle(ref: SpectrumReference, phi0) -> dict:
    support = spectral_decomposition(ref, phi0).support()
    return {ref.labels[j]: float(ref.energies[j]) for j in support}


def single_shot_record(run: DtRun, seed: int) -> dict:
    layout, t = run.config.layout, run.config.evolution.total_time
    bits, y = sample_outcome(run.distribution, seed)
    record = {"seed": seed, "bitstring": bits, "bin": y, "ambiguous": False}
    if run.config.mode == "qpe":
        record["energy_hartree"] = decode_total_energy(y, layout.n_ancilla, t, run.config.hamiltonian.identity_coefficient)
        return record
    try:
        estimate = decode_phase(y, layout.n_ancilla, t)
        record["delta_E_hartree"] = estimate.delta_e
        record["delta_E_ev"] = hartree_to_ev(estimate.delta_e)
    except PhaseAmbiguityError as e:
        record["ambiguous"] = True
        record["error"] = str(e)
    return record


def build_report(run: DtRun, ref: SpectrumReference, inputs: RunInputs) -> pd.DataFrame:
    layout, t = run.config.layout, run.config.evolution.total_time
    if run.config.mode == "qpe":
        return energy_report(
            run.distribution,
            layout.n_ancilla,
            t,
            inputs.hamiltonian.identity_coefficient,
            eigenvalue_oracle(ref, inputs.phi0),
        )
    return gap_report(run.distribution, layout.n_ancilla, t, candidate_gaps(ref, inputs.phi0, inputs.phi1))


def summary_row(run: DtRun, report: pd.DataFrame) -> dict:
    row = {"run": run.label, "dt": run.dt, "path": run.config.resolved_path, "elapsed_seconds": run.elapsed}
    if report.empty:
        return row
    top = report.iloc[0]
    value_key = "energy_hartree" if run.config.mode == "qpe" else "delta_E_hartree"
    oracle_key = "nearest_oracle_energy" if run.config.mode == "qpe" else "nearest_oracle_gap"
    row.update(
        {
            "dominant_bin": int(top["bin"]),
            "mass": float(top["mass"]),
            "value_hartree": float(top[value_key]),
            "oracle_hartree": float(top[oracle_key]),
            "deviation": float(top["deviation"]),
            "resolution": float(top["resolution"]),
            "label": top["label"],
        }
    )
    return row


def execute(manifest: RunManifest, options=None, mode: str = "qpde", inputs: RunInputs | None = None) -> tuple:
    """
    회로 실행 + 파일 쓰기.

    Returns:
        (작성한 파일 경로 목록, DtRun 목록, 보고서 DataFrame 목록)
    """
    mode = CLI_MODES.get(mode, mode)
    inputs = inputs or load_run_inputs(manifest)
    if mode != "qpe" and inputs.phi1 is None:
        raise QpdeInputError(f"{mode} 실행에는 manifest 의 phi1 이 필요합니다.")
    ref = oracle_reference(inputs)
    runs = run_distributions(manifest, inputs, mode, _worker_count(options))

    single_shot = bool(getattr(options, "single_shot", False))
    prefix = mode
    paths, reports, summary, ambiguity = [], [], [], None
    for run in runs:
        report = build_report(run, ref, inputs)
        payload = run_payload(
            run.config,
            run.distribution,
            {"elapsed_seconds": run.elapsed, "created_at": datetime.now().isoformat(timespec="seconds")},
        )
        if mode == "qpde_naive":
            corrected = run_circuit(dataclasses.replace(run.config, mode="qpde"))
            payload["comparison"] = {
                "reference_mode": "qpde",
                "total_variation": run.distribution.total_variation(corrected),
            }
            print(f"[{mode}] {run.label}: qpde 대비 total variation = {payload['comparison']['total_variation']:.3e}")
        if single_shot:
            payload["single_shot"] = single_shot_record(run, manifest.seed)
            if payload["single_shot"]["ambiguous"] and ambiguity is None:
                ambiguity = payload["single_shot"]["error"]
        paths.append(write_json(manifest.output_path(f"{prefix}_{run.label}.json"), payload))
        paths.append(write_csv(manifest.output_path(f"{prefix}_{run.label}_report.csv"), report))
        reports.append(report)
        summary.append(summary_row(run, report))

    paths.append(write_csv(manifest.output_path(f"{prefix}_summary.csv"), pd.DataFrame(summary)))
    print(f"{mode} 결과 저장 완료: {len(paths)}개 파일 → {manifest.output_dir}")
    if ambiguity is not None:
        raise PhaseAmbiguityError(ambiguity)
    return paths, runs, reports


def run(manifest: RunManifest, options=None, mode: str = "qpde") -> list:
    return execute(manifest, options, mode)[0]
