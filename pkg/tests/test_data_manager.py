import json
import os
import shutil

import pytest

from data_manager import (
    load_manifest,
    load_run_inputs,
    load_state_spec,
    normalize_path_name,
    state_spec_from_dict,
)
from utils import QpdeInputError


@pytest.fixture
def workspace(tmp_path, data_file):
    """FCIDUMP 와 상태 스펙을 복사해 둔 임시 작업 폴더."""
    for name in ("fcidump_h2_2orb.txt", "phi_hf_2orb.json", "phi_triplet_2orb.json"):
        shutil.copy(data_file(name), tmp_path / name)
    return tmp_path


def _write_manifest(folder, body: dict, name: str = "manifest.json") -> str:
    path = folder / name
    path.write_text(json.dumps(body), encoding="utf-8")
    return str(path)


BASE = {"fcidump": "fcidump_h2_2orb.txt", "phi0": "phi_hf_2orb.json", "phi1": "phi_triplet_2orb.json"}


class TestLoadManifest:
    def test_preset_supplies_defaults(self, workspace):
        manifest = load_manifest(_write_manifest(workspace, {**BASE, "preset": "h2", "n_ancilla": 8}))
        assert manifest.n_ancilla == 8
        assert manifest.total_time == 10.0
        assert manifest.dts == (0.5, 1.0, 1.25)
        assert manifest.preset == "h2"

    def test_argument_preset_wins(self, workspace):
        path = _write_manifest(workspace, {**BASE, "preset": "h2"})
        assert load_manifest(path, preset="hcho").n_ancilla == 10

    def test_relative_paths_resolve_against_manifest(self, workspace):
        manifest = load_manifest(_write_manifest(workspace, {**BASE, "preset": "h2", "output_dir": "out"}))
        assert manifest.fcidump == os.path.join(str(workspace), "fcidump_h2_2orb.txt")
        assert manifest.output_path("x.csv") == os.path.join(str(workspace), "out", "x.csv")

    def test_missing_referenced_file_is_named(self, workspace):
        path = _write_manifest(workspace, {**BASE, "preset": "h2", "phi1": "nope.json"})
        with pytest.raises(FileNotFoundError, match="nope.json"):
            load_manifest(path)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_manifest(str(tmp_path / "absent.json"))

    def test_needs_time_and_ancilla(self, workspace):
        with pytest.raises(QpdeInputError, match="n_ancilla"):
            load_manifest(_write_manifest(workspace, {**BASE, "total_time": 1.0, "dt": 0.5}))

    def test_broken_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(QpdeInputError):
            load_manifest(str(path))

    def test_sector_and_path_alias(self, workspace):
        body = {**BASE, "preset": "h2", "path": "gate", "sector": {"n_electrons": 2, "sz": 0}}
        manifest = load_manifest(_write_manifest(workspace, body))
        assert manifest.path == "gate_level"
        assert manifest.sector == (2, 0.0)

    def test_with_overrides(self, workspace, tmp_path):
        manifest = load_manifest(_write_manifest(workspace, {**BASE, "preset": "h2", "seed": 3}))
        assert manifest.with_overrides() is manifest
        changed = manifest.with_overrides(path="compiled", seed=11, output_dir=str(tmp_path / "elsewhere"))
        assert (changed.path, changed.seed) == ("compiled_dense", 11)
        assert changed.output_dir == str(tmp_path / "elsewhere")
        assert manifest.seed == 3

    def test_evolution_uses_manifest_settings(self, workspace):
        manifest = load_manifest(_write_manifest(workspace, {**BASE, "preset": "h2", "path": "exact"}))
        evolution = manifest.evolution(0.5)
        assert (evolution.steps, evolution.path) == (20, "exact")

    def test_bundled_manifest_loads(self, data_file):
        manifest = load_manifest(data_file("manifest_h2_sweep.json"))
        assert [g.label for g in manifest.geometries] == ["R=1.5", "R=2.0", "R=2.5"]
        assert manifest.fcidump is None


def test_normalize_path_name():
    assert normalize_path_name("compiled") == "compiled_dense"
    assert normalize_path_name("gate_level") == "gate_level"
    with pytest.raises(QpdeInputError):
        normalize_path_name("fast")


class TestStateSpecs:
    def test_determinant_forms_agree(self):
        by_occupation = state_spec_from_dict({"determinants": [{"occupation": "aa00"}]})
        by_bits = state_spec_from_dict({"determinants": [{"bits": "10100000", "coefficient": 1.0}]})
        assert by_occupation == by_bits

    def test_two_config_from_luno_occupation(self):
        spec = state_spec_from_dict({"two_config": {"homo": "20", "lumo": "02", "n_luno": 0.0}})
        assert [c for _, c in spec.entries] == [1.0, -0.0]

    def test_single_excitation(self):
        spec = state_spec_from_dict({"single_excitation": {"reference": "20", "from": 0, "to": 1}})
        assert len(spec.entries) == 2

    def test_multiple_determinants_need_coefficients(self):
        with pytest.raises(QpdeInputError):
            state_spec_from_dict({"determinants": [{"occupation": "20"}, {"occupation": "02"}]})

    def test_unknown_form(self):
        with pytest.raises(QpdeInputError):
            state_spec_from_dict({"hartree_fock": True})

    def test_file_errors_name_the_file(self, tmp_path):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({"determinants": [{"occupation": "2000"}]}), encoding="utf-8")
        with pytest.raises(QpdeInputError, match="phi.json"):
            load_state_spec(str(path), n_modes=4)


def test_run_inputs_share_electron_count(workspace):
    manifest = load_manifest(_write_manifest(workspace, {**BASE, "preset": "h2"}))
    inputs = load_run_inputs(manifest)
    assert inputs.hamiltonian.qubit_count == 4
    assert inputs.phi0.n_electrons == inputs.phi1.n_electrons == 2
