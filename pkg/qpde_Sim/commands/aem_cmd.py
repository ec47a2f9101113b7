# ==============================================================================
# aem_cmd.py - 'aem' 명령: dt 별 QPDE 간격을 Δt² 로 외삽
# ==============================================================================
# 1. qpde 명령과 같은 방식으로 dt 마다 회로를 실행하고 파일을 씁니다.
# 2. dt 마다 주 피크(질량 최대, 또는 --peak-bin 에 가장 가까운 피크)의 ΔE 를 고릅니다.
# 3. 고른 값들이 10 × bin 해상도 이상 흩어져 있으면 PeakSelectionError.
# 4. f(Δt) = a·Δt² + b 맞춤 → aem.json (요약) / aem.csv (점별 진단)
# ==============================================================================
import pandas as pd

from analysis.mitigation import AemFit, aem_extrapolate, precision_summary
from commands import qpde_cmd
from data_manager import RunInputs, RunManifest
from utils import PeakSelectionError, QpdeInputError, format_bitstring, get_sim_config, write_csv, write_json


def check_dt_list(manifest: RunManifest) -> None:
    if manifest.path == "exact":
        raise QpdeInputError("AEM 은 Trotter 경로(gate/compiled/auto)에서만 의미가 있습니다. --path exact 는 사용할 수 없습니다.")
    if len(set(manifest.dts)) < 2:
        raise QpdeInputError(f"AEM 에는 서로 다른 dt 가 2개 이상 필요합니다: {list(manifest.dts)}")


def _circular_distance(a: int, b: int, size: int) -> int:
    d = abs(a - b) % size
    return min(d, size - d)


def select_dominant(report: pd.DataFrame, n_ancilla: int, peak_bin: int | None = None) -> pd.Series:
    """보고서에서 주 피크 행. peak_bin 이 있으면 그 bin 에 가장 가까운 피크."""
    if report.empty:
        raise PeakSelectionError("피크가 하나도 없습니다. min_peak_mass 설정이나 입력 상태를 확인하세요.")
    if peak_bin is None:
        return report.iloc[0]
    size = 1 << n_ancilla
    distances = report["bin"].map(lambda y: _circular_distance(int(y), peak_bin, size))
    return report.loc[distances.idxmin()]


def dominant_points(runs: list, reports: list, n_ancilla: int, peak_bin: int | None = None) -> pd.DataFrame:
    rows = []
    for run, report in zip(runs, reports):
        top = select_dominant(report, n_ancilla, peak_bin)
        rows.append(
            {
                "dt": run.dt,
                "bin": int(top["bin"]),
                "bitstring": format_bitstring(int(top["bin"]), n_ancilla),
                "mass": float(top["mass"]),
                "delta_E_hartree": float(top["delta_E_hartree"]),
                "resolution": float(top["resolution"]),
                "nearest_oracle_gap": float(top["nearest_oracle_gap"]),
                "label": top["label"],
                "ambiguous": bool(top["ambiguous"]),
            }
        )
    points = pd.DataFrame(rows)
    spread = points["delta_E_hartree"].max() - points["delta_E_hartree"].min()
    limit = get_sim_config()["analysis"]["aem_consistency_factor"] * points["resolution"].max()
    if spread > limit:
        raise PeakSelectionError(
            f"dt 별 주 피크가 서로 다릅니다 (bin {points['bin'].tolist()}, 간격 차 {spread:.6f} > {limit:.6f} Hartree). "
            "--peak-bin 으로 사용할 피크를 지정하세요."
        )
    return points


def fit_points(points: pd.DataFrame) -> tuple:
    """(AemFit, 기준 간격 또는 None, 기준 라벨)."""
    fit = aem_extrapolate(zip(points["dt"], points["delta_E_hartree"]))
    labels = [x for x in points["label"] if x]
    label = max(set(labels), key=labels.count) if labels else ""
    reference = float(points.loc[points["label"] == label, "nearest_oracle_gap"].iloc[0]) if label else None
    return fit, reference, label


def diagnostics_table(points: pd.DataFrame, fit: AemFit) -> pd.DataFrame:
    table = points.copy()
    table["fitted_hartree"] = fit.predict(table["dt"].to_numpy())
    table["fit_residual"] = table["delta_E_hartree"] - table["fitted_hartree"]
    return table


def mitigate(manifest: RunManifest, options=None, inputs: RunInputs | None = None) -> tuple:
    """회로 실행부터 맞춤까지. (파일 경로 목록, 요약 dict, 점 DataFrame)."""
    check_dt_list(manifest)
    paths, runs, reports = qpde_cmd.execute(manifest, options, "qpde", inputs)
    points = dominant_points(runs, reports, manifest.n_ancilla, getattr(options, "peak_bin", None))
    fit, reference, label = fit_points(points)
    summary = precision_summary(fit, reference)
    summary["reference_label"] = label
    summary["points"] = points[["dt", "bin", "delta_E_hartree"]].to_dict(orient="records")
    return paths, summary, diagnostics_table(points, fit)


def run(manifest: RunManifest, options=None) -> list:
    print(f"--- AEM 실행: dt = {list(manifest.dts)} ---")
    paths, summary, table = mitigate(manifest, options)
    paths.append(write_json(manifest.output_path("aem.json"), summary))
    paths.append(write_csv(manifest.output_path("aem.csv"), table))
    line = f"완화된 간격 b = {summary['mitigated_gap_hartree']:.6f} Hartree ({summary['mitigated_gap_ev']:.4f} eV)"
    if "deviation_hartree" in summary:
        verdict = "만족" if summary["within_chemical_precision"] else "미달"
        line += f", 기준 {summary['reference_label']} 대비 {summary['deviation_hartree']:+.6f} Hartree (화학적 정밀도 {verdict})"
    print(line)
    return paths
