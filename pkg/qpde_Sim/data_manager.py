# ==============================================================================
# data_manager.py - 입력 파일 로딩 (manifest, FCIDUMP, 상태 스펙)
# ==============================================================================
# [주요 기능]
# - load_manifest: 실행 manifest(JSON) 를 읽고 프리셋 기본값을 합친 뒤
#   상대 경로를 manifest 위치 기준으로 풀고, 참조 파일이 있는지 확인합니다.
# - read_fcidump_file / load_qubit_hamiltonian: FCIDUMP → 큐비트 해밀토니안 (캐시)
# - load_state_spec: |Φ0⟩, |Φ1⟩ 상태 스펙 JSON
#
# [상태 스펙 JSON 형식]
#   {"determinants": [{"occupation": "2000", "coefficient": 1.0}]}
#   {"determinants": [{"bits": "11000000", "coefficient": 1.0}]}
#   {"two_config": {"homo": "20", "lumo": "02", "y": 0.1}}        (y 대신 n_luno 가능)
#   {"single_excitation": {"reference": "2000", "from": 0, "to": 1}}
# ==============================================================================
import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache

from hamiltonian.fermion_hamiltonian import (
    DeterminantSpec,
    MolecularIntegrals,
    build_fermion_hamiltonian,
    determinant_from_notation,
    jordan_wigner,
    parse_fcidump,
)
from hamiltonian.pauli_core import PauliSum
from quantum.evolution_compiler import PATHS, POWER_METHODS, EvolutionSpec
from quantum.state_prep import DiradicalSpec, SuperpositionSpec, spin_adapted_single, two_config_state
from utils import FcidumpParseError, QpdeInputError, get_preset

logger = logging.getLogger(__name__)

# CLI 와 manifest 에서 쓰는 짧은 이름 → 내부 경로 이름
PATH_ALIASES = {"gate": "gate_level", "compiled": "compiled_dense", "exact": "exact", "auto": "auto"}


def normalize_path_name(name: str) -> str:
    if name in PATHS:
        return name
    if name in PATH_ALIASES:
        return PATH_ALIASES[name]
    raise QpdeInputError(f"알 수 없는 전개 경로: {name} (가능: {', '.join(PATH_ALIASES)})")


@dataclass(frozen=True)
class GeometryEntry:
    label: str
    fcidump: str


@dataclass(frozen=True)
class RunManifest:
    source: str
    fcidump: str | None
    phi0: str | None
    phi1: str | None
    n_ancilla: int
    total_time: float
    dts: tuple
    path: str = "auto"
    power_method: str = "squaring"
    ordering: str = "magnitude"
    seed: int = 0
    output_dir: str = "results"
    sector: tuple | None = None
    scan: dict = field(default_factory=dict)
    geometries: tuple = ()
    preset: str | None = None

    def evolution(self, dt: float) -> EvolutionSpec:
        return EvolutionSpec.from_dt(
            self.total_time, dt, ordering=self.ordering, path=self.path, power_method=self.power_method
        )

    def with_overrides(self, path: str | None = None, seed: int | None = None, output_dir: str | None = None) -> "RunManifest":
        """CLI 플래그 값이 주어진 항목만 덮어씁니다."""
        changes = {}
        if path is not None:
            changes["path"] = normalize_path_name(path)
        if seed is not None:
            changes["seed"] = int(seed)
        if output_dir is not None:
            changes["output_dir"] = os.path.abspath(output_dir)
        return dataclasses.replace(self, **changes) if changes else self

    def output_path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)


def _resolve(base_dir: str, value: str | None) -> str | None:
    if value is None:
        return None
    return value if os.path.isabs(value) else os.path.normpath(os.path.join(base_dir, value))


def _require_file(path: str | None, what: str) -> None:
    if path is not None and not os.path.isfile(path):
        raise FileNotFoundError(f"{what} 파일을 찾을 수 없습니다: {path}")


def _parse_sector(raw) -> tuple | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise QpdeInputError(f"sector 는 {{'n_electrons': N, 'sz': S_z}} 형태여야 합니다: {raw!r}")
    n_el = raw.get("n_electrons")
    sz = raw.get("sz")
    return (int(n_el) if n_el is not None else None, float(sz) if sz is not None else None)


def load_manifest(path: str, preset: str | None = None) -> RunManifest:
    """
    실행 manifest 를 읽습니다.

    값의 우선순위: manifest 본문 > 프리셋 (인자 preset 이 manifest 의 "preset" 보다 우선).
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"manifest 파일을 찾을 수 없습니다: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise QpdeInputError(f"{path}: manifest JSON 형식 오류 ({e.lineno}번째 줄: {e.msg})") from e
    if not isinstance(raw, dict):
        raise QpdeInputError(f"{path}: manifest 최상위는 JSON 객체여야 합니다.")

    preset_name = preset or raw.get("preset")
    merged = dict(get_preset(preset_name)) if preset_name else {}
    merged.update({k: v for k, v in raw.items() if v is not None})

    for key in ("n_ancilla", "total_time"):
        if key not in merged:
            raise QpdeInputError(f"{path}: manifest 에 '{key}' 가 없습니다 (또는 preset 지정 필요).")
    dts = merged.get("dt", [])
    dts = tuple(float(x) for x in (dts if isinstance(dts, list) else [dts]))
    if not dts:
        raise QpdeInputError(f"{path}: dt 목록이 비어 있습니다.")
    power_method = merged.get("power_method", "squaring")
    if power_method not in POWER_METHODS:
        raise QpdeInputError(f"{path}: 알 수 없는 power_method: {power_method}")

    base_dir = os.path.dirname(os.path.abspath(path))
    geometries = tuple(
        GeometryEntry(str(g["label"]), _resolve(base_dir, g["fcidump"])) for g in merged.get("geometries", [])
    )
    manifest = RunManifest(
        source=os.path.abspath(path),
        fcidump=_resolve(base_dir, merged.get("fcidump")),
        phi0=_resolve(base_dir, merged.get("phi0")),
        phi1=_resolve(base_dir, merged.get("phi1")),
        n_ancilla=int(merged["n_ancilla"]),
        total_time=float(merged["total_time"]),
        dts=dts,
        path=normalize_path_name(merged.get("path", "auto")),
        power_method=power_method,
        ordering=merged.get("ordering", "magnitude"),
        seed=int(merged.get("seed", 0)),
        output_dir=_resolve(base_dir, merged.get("output_dir", "results")),
        sector=_parse_sector(merged.get("sector")),
        scan=dict(merged.get("scan", {})),
        geometries=geometries,
        preset=preset_name,
    )

    _require_file(manifest.fcidump, "FCIDUMP")
    _require_file(manifest.phi0, "phi0 상태 스펙")
    _require_file(manifest.phi1, "phi1 상태 스펙")
    for g in geometries:
        _require_file(g.fcidump, f"geometry '{g.label}' FCIDUMP")
    if manifest.fcidump is None and not geometries:
        raise QpdeInputError(f"{path}: fcidump 또는 geometries 중 하나는 있어야 합니다.")

    logger.info("manifest 로드: %s (preset=%s, dt=%s)", path, preset_name, list(dts))
    return manifest


# ------------------------------------------------------------------------------
# FCIDUMP / 해밀토니안
# ------------------------------------------------------------------------------
def read_fcidump_file(path: str) -> MolecularIntegrals:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"FCIDUMP 파일을 찾을 수 없습니다: {path}")
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        return parse_fcidump(text)
    except FcidumpParseError as e:
        wrapped = FcidumpParseError(f"{path}: {e}")
        wrapped.line_number = e.line_number
        raise wrapped from e


@lru_cache(maxsize=16)
def load_qubit_hamiltonian(path: str) -> PauliSum:
    """FCIDUMP 파일 → JWT 큐비트 해밀토니안. 같은 경로는 한 번만 변환합니다."""
    integrals = read_fcidump_file(path)
    h = jordan_wigner(build_fermion_hamiltonian(integrals), integrals.n_modes)
    logger.info("해밀토니안 변환: %s → %d 큐비트, %d 항, C=%.10f", path, h.qubit_count, h.term_count, h.identity_coefficient)
    return h


# ------------------------------------------------------------------------------
# 상태 스펙
# ------------------------------------------------------------------------------
def _determinant(entry: dict, norb: int | None, n_electrons: int | None) -> DeterminantSpec:
    if "occupation" in entry:
        return determinant_from_notation(str(entry["occupation"]), norb, n_electrons)
    if "bits" in entry:
        det = DeterminantSpec.from_bitstring(str(entry["bits"]))
        if norb is not None and det.n_modes != 2 * norb:
            raise QpdeInputError(f"비트열 길이 {det.n_modes} 가 스핀 오비탈 수 {2 * norb} 와 다릅니다.")
        return det
    raise QpdeInputError(f"행렬식 항목에는 occupation 또는 bits 가 필요합니다: {entry!r}")


def state_spec_from_dict(raw: dict, norb: int | None = None, n_electrons: int | None = None) -> SuperpositionSpec:
    if "determinants" in raw:
        entries = raw["determinants"]
        if not isinstance(entries, list) or not entries:
            raise QpdeInputError("determinants 는 비어 있지 않은 목록이어야 합니다.")
        default = 1.0 if len(entries) == 1 else None
        pairs = []
        for entry in entries:
            coefficient = entry.get("coefficient", default)
            if coefficient is None:
                raise QpdeInputError(f"행렬식이 여러 개이면 coefficient 가 필요합니다: {entry!r}")
            pairs.append((_determinant(entry, norb, n_electrons), float(coefficient)))
        return SuperpositionSpec(tuple(pairs))

    if "two_config" in raw:
        body = raw["two_config"]
        y = DiradicalSpec(n_luno=body.get("n_luno"), y=body.get("y")).value
        homo = determinant_from_notation(str(body["homo"]), norb, n_electrons)
        lumo = determinant_from_notation(str(body["lumo"]), norb, n_electrons)
        return two_config_state(y, homo, lumo)

    if "single_excitation" in raw:
        body = raw["single_excitation"]
        hf = determinant_from_notation(str(body["reference"]), norb, n_electrons)
        return spin_adapted_single(hf, int(body["from"]), int(body["to"]))

    raise QpdeInputError(f"알 수 없는 상태 스펙 형식입니다. 키: {sorted(raw)}")


def load_state_spec(path: str, n_modes: int | None = None, n_electrons: int | None = None) -> SuperpositionSpec:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"상태 스펙 파일을 찾을 수 없습니다: {path}")
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise QpdeInputError(f"{path}: 상태 스펙 JSON 형식 오류 ({e.lineno}번째 줄: {e.msg})") from e
    norb = n_modes // 2 if n_modes is not None else None
    try:
        spec = state_spec_from_dict(raw, norb, n_electrons)
    except (KeyError, TypeError) as e:
        raise QpdeInputError(f"{path}: 상태 스펙 항목이 잘못되었습니다 ({e})") from e
    except QpdeInputError as e:
        raise QpdeInputError(f"{path}: {e}") from e
    if n_modes is not None and spec.n_modes != n_modes:
        raise QpdeInputError(f"{path}: 상태의 큐비트 수 {spec.n_modes} 가 해밀토니안 {n_modes} 와 다릅니다.")
    return spec


@dataclass(frozen=True)
class RunInputs:
    hamiltonian: PauliSum
    phi0: SuperpositionSpec | None
    phi1: SuperpositionSpec | None


def load_run_inputs(manifest: RunManifest, fcidump: str | None = None) -> RunInputs:
    """manifest 가 가리키는 해밀토니안과 상태 스펙을 함께 읽습니다 (fcidump 로 해밀토니안만 바꿀 수 있음)."""
    source = fcidump or manifest.fcidump
    if source is None:
        raise QpdeInputError("FCIDUMP 경로가 지정되지 않았습니다.")
    h = load_qubit_hamiltonian(source)
    phi0 = load_state_spec(manifest.phi0, h.qubit_count) if manifest.phi0 else None
    n_electrons = phi0.n_electrons if phi0 is not None else None
    phi1 = load_state_spec(manifest.phi1, h.qubit_count, n_electrons) if manifest.phi1 else None
    return RunInputs(h, phi0, phi1)
