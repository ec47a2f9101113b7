# ==============================================================================
# utils.py - 설정, 예외, 종료 코드, 결과 파일 도우미
# ==============================================================================
# config.ini
#   [SIMULATION] 허용오차와 메모리 가드 (prune/imaginary tolerance, 큐비트 상한)
#   [ANALYSIS]   피크 질량 하한, 피크 창 크기, AEM 일관성 배수
#   [UNITS]      Hartree → eV, Hartree → kcal/mol
#   [PRESET.*]   n_ancilla / total_time / dt 목록 (manifest 의 "preset")
#   get_sim_config() 가 한 번 읽어 캐시하고, sim_setting()/get_preset() 이 꺼내 씁니다.
#
# 예외와 CLI 종료 코드 (exit_code_for)
#   QpdeInputError, FcidumpParseError, PeakSelectionError → 2
#   NumericalGuardError → 3,  PhaseAmbiguityError → 4
#
# write_json / write_csv 는 같은 디렉터리의 임시 파일에 쓴 뒤 os.replace 로 교체합니다.
# ==============================================================================
import configparser
import json
import os
import tempfile
from functools import lru_cache

import pandas as pd

# --- 경로 설정 ---
current_file = os.path.abspath(__file__)
qpde_sim_dir = os.path.dirname(current_file)
project_root = os.path.dirname(qpde_sim_dir)
CONFIG_PATH = os.path.join(project_root, "config.ini")
DATA_DIR = os.path.join(qpde_sim_dir, "data")


# --- 예외 클래스 ---
class QpdeInputError(ValueError):
    """입력 파일/인자/전제조건 위반 (종료 코드 2)."""


class FcidumpParseError(QpdeInputError):
    """FCIDUMP 파싱 오류. 몇 번째 줄에서 실패했는지 함께 보관합니다."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"{line_number}번째 줄: {message}"
        super().__init__(message)


class PeakSelectionError(QpdeInputError):
    """dt 마다 주 피크가 서로 다를 때 발생합니다 (--peak-bin 으로 지정 필요)."""


class NumericalGuardError(RuntimeError):
    """크기/메모리 가드, 유니터리성 위반 등 수치 가드 오류 (종료 코드 3)."""


class PhaseAmbiguityError(ValueError):
    """위상차가 (1/4, 3/4) 구간에 있어 부호를 정할 수 없음 (종료 코드 4)."""


EXIT_CODES = {
    "ok": 0,
    "input": 2,
    "numerical": 3,
    "ambiguity": 4,
}


def exit_code_for(error: BaseException) -> int:
    """예외 종류에 맞는 CLI 종료 코드를 반환합니다."""
    if isinstance(error, PhaseAmbiguityError):
        return EXIT_CODES["ambiguity"]
    if isinstance(error, NumericalGuardError):
        return EXIT_CODES["numerical"]
    if isinstance(error, (QpdeInputError, FileNotFoundError, KeyError)):
        return EXIT_CODES["input"]
    raise error


# --- 설정 로드 ---
def _float_list(raw: str) -> list[float]:
    return [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]


@lru_cache(maxsize=None)
def get_sim_config(config_path: str = CONFIG_PATH) -> dict:
    """
    프로젝트 루트에 있는 config.ini 에서 시뮬레이션 설정을 읽어 반환합니다.

    Returns:
        dict: 섹션별 하위 dict ("simulation", "analysis", "units", "presets")
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"config.ini 파일을 찾을 수 없습니다: {config_path}")

    config = configparser.ConfigParser()
    config.read(config_path, encoding="utf-8")

    for section in ("SIMULATION", "ANALYSIS", "UNITS"):
        if section not in config:
            raise KeyError(f"[{section}] 섹션을 config.ini에서 찾을 수 없습니다. (path={config_path})")

    sim = config["SIMULATION"]
    ana = config["ANALYSIS"]
    units = config["UNITS"]

    presets = {}
    for section in config.sections():
        if section.startswith("PRESET."):
            body = config[section]
            presets[section[len("PRESET."):]] = {
                "n_ancilla": body.getint("n_ancilla"),
                "total_time": body.getfloat("total_time"),
                "dt": _float_list(body.get("dt", "")),
            }

    return {
        "simulation": {
            "prune_tolerance": sim.getfloat("prune_tolerance"),
            "imaginary_tolerance": sim.getfloat("imaginary_tolerance"),
            "max_total_qubits": sim.getint("max_total_qubits"),
            "max_realize_qubits": sim.getint("max_realize_qubits"),
            "max_dense_qubits": sim.getint("max_dense_qubits"),
            "unitarity_tolerance": sim.getfloat("unitarity_tolerance"),
            "compiled_threshold_repetitions": sim.getint("compiled_threshold_repetitions"),
            "workers": sim.getint("workers"),
        },
        "analysis": {
            "min_peak_mass": ana.getfloat("min_peak_mass"),
            "peak_window": ana.getint("peak_window"),
            "sector_tolerance": ana.getfloat("sector_tolerance"),
            "aem_consistency_factor": ana.getfloat("aem_consistency_factor"),
        },
        "units": {
            "hartree_to_ev": units.getfloat("hartree_to_ev"),
            "kcal_per_hartree": units.getfloat("kcal_per_hartree"),
        },
        "presets": presets,
    }


def sim_setting(key: str):
    """[SIMULATION] 섹션의 값 하나를 꺼냅니다."""
    return get_sim_config()["simulation"][key]


def get_preset(name: str) -> dict:
    presets = get_sim_config()["presets"]
    if name not in presets:
        raise QpdeInputError(f"알 수 없는 프리셋입니다: {name} (사용 가능: {', '.join(sorted(presets))})")
    return dict(presets[name])


# --- 단위 변환 ---
def hartree_to_ev(value):
    return value * get_sim_config()["units"]["hartree_to_ev"]


def hartree_to_kcal(value):
    return value * get_sim_config()["units"]["kcal_per_hartree"]


def chemical_precision_hartree() -> float:
    """1 kcal/mol 을 Hartree 로 환산한 값 (≈1.6e-3)."""
    return 1.0 / get_sim_config()["units"]["kcal_per_hartree"]


def format_bitstring(index: int, width: int) -> str:
    """정수 인덱스를 레지스터 순서(큐비트 0 이 왼쪽)의 비트열로 바꿉니다."""
    return format(int(index), f"0{width}b")


# --- 결과 파일 쓰기 ---
def _atomic_write(path: str, writer) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fp, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fp)
    try:
        writer(temp_path)
        os.replace(temp_path, path)
    finally:
        if os.path.exists(temp_path):
            os.remove(temp_path)
    return path


def write_json(path: str, payload: dict) -> str:
    """dict 를 JSON 파일로 원자적으로 저장합니다. 키 순서는 고정합니다."""

    def _writer(temp_path):
        with open(temp_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")

    return _atomic_write(path, _writer)


def write_csv(path: str, df: pd.DataFrame) -> str:
    """DataFrame 을 CSV 로 원자적으로 저장합니다."""
    return _atomic_write(path, lambda temp_path: df.to_csv(temp_path, index=False, float_format="%.12g"))
