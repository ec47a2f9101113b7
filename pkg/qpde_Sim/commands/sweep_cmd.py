# ==============================================================================
# sweep_cmd.py - 'sweep' 명령: 구조(결합 길이) 목록에 대한 QPDE + AEM 표
# ==============================================================================
# manifest 의 "geometries": [{"label": "R=1.0", "fcidump": "..."}, ...]
# 구조마다 같은 phi0/phi1 로 dt 별 QPDE 를 돌리고, 주 피크 간격, AEM 간격,
# 기준 간격과 편차를 long format 으로 sweep.csv 한 파일에 모읍니다.
# ==============================================================================
import dataclasses
import math
import os

import pandas as pd

from commands import aem_cmd, qpde_cmd
from data_manager import RunManifest, load_run_inputs
from utils import QpdeInputError, hartree_to_ev, write_csv

SWEEP_COLUMNS = [
    "geometry",
    "estimate",
    "dt",
    "bin",
    "delta_E_hartree",
    "delta_E_ev",
    "oracle_label",
    "oracle_gap_hartree",
    "deviation_hartree",
    "deviation_ev",
]


def _row(geometry: str, estimate: str, dt, bin_index, value: float, label: str, oracle: float | None) -> dict:
    deviation = value - oracle if oracle is not None else math.nan
    return {
        "geometry": geometry,
        "estimate": estimate,
        "dt": dt,
        "bin": bin_index,
        "delta_E_hartree": value,
        "delta_E_ev": hartree_to_ev(value),
        "oracle_label": label,
        "oracle_gap_hartree": oracle if oracle is not None else math.nan,
        "deviation_hartree": deviation,
        "deviation_ev": hartree_to_ev(deviation),
    }


def run(manifest: RunManifest, options=None) -> list:
    if not manifest.geometries:
        raise QpdeInputError("sweep 에는 manifest 의 geometries 목록이 필요합니다.")
    aem_enabled = manifest.path != "exact" and len(set(manifest.dts)) >= 2
    rows, paths = [], []
    for i, geometry in enumerate(manifest.geometries, start=1):
        print(f"--- [{i}/{len(manifest.geometries)}] {geometry.label}: {geometry.fcidump} ---")
        sub = dataclasses.replace(manifest, output_dir=os.path.join(manifest.output_dir, f"geometry_{i:02d}"))
        inputs = load_run_inputs(sub, geometry.fcidump)
        if aem_enabled:
            written, summary, points = aem_cmd.mitigate(sub, options, inputs)
            label = summary["reference_label"]
            oracle = summary.get("reference_gap_hartree")
            for point in points.itertuples():
                rows.append(_row(geometry.label, "qpde", point.dt, point.bin, point.delta_E_hartree, label, oracle))
            rows.append(_row(geometry.label, "aem", None, None, summary["mitigated_gap_hartree"], label, oracle))
        else:
            written, runs, reports = qpde_cmd.execute(sub, options, "qpde", inputs)
            points = aem_cmd.dominant_points(runs, reports, manifest.n_ancilla, getattr(options, "peak_bin", None))
            for point in points.itertuples():
                rows.append(
                    _row(geometry.label, "qpde", point.dt, point.bin, point.delta_E_hartree, point.label, point.nearest_oracle_gap)
                )
        paths.extend(written)

    paths.append(write_csv(manifest.output_path("sweep.csv"), pd.DataFrame(rows, columns=SWEEP_COLUMNS)))
    print(f"sweep 완료: {len(manifest.geometries)}개 구조 → {paths[-1]}")
    return paths
