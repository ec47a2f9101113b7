import json

import pandas as pd
import pytest

from utils import (
    FcidumpParseError,
    NumericalGuardError,
    PeakSelectionError,
    PhaseAmbiguityError,
    QpdeInputError,
    chemical_precision_hartree,
    exit_code_for,
    get_preset,
    get_sim_config,
    write_csv,
    write_json,
)


@pytest.mark.parametrize(
    "error, code",
    [
        (QpdeInputError("x"), 2),
        (FcidumpParseError("x", 3), 2),
        (PeakSelectionError("x"), 2),
        (FileNotFoundError("x"), 2),
        (NumericalGuardError("x"), 3),
        (PhaseAmbiguityError("x"), 4),
    ],
)
def test_exit_code_for(error, code):
    assert exit_code_for(error) == code


def test_unknown_error_is_raised_again():
    with pytest.raises(ZeroDivisionError):
        exit_code_for(ZeroDivisionError("x"))


def test_config_sections_and_presets():
    config = get_sim_config()
    assert set(config) == {"simulation", "analysis", "units", "presets"}
    assert set(config["presets"]) == {"h2", "methylene", "hcho"}
    assert config["simulation"]["compiled_threshold_repetitions"] == 64
    assert chemical_precision_hartree() == pytest.approx(1.5936e-3, abs=1e-6)


def test_preset_is_a_copy():
    preset = get_preset("h2")
    assert preset == {"n_ancilla": 12, "total_time": 10.0, "dt": [0.5, 1.0, 1.25]}
    preset["n_ancilla"] = 3
    assert get_preset("h2")["n_ancilla"] == 12


def test_unknown_preset():
    with pytest.raises(QpdeInputError, match="h2"):
        get_preset("water")


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        get_sim_config(str(tmp_path / "config.ini"))


def test_writers_leave_no_temporary_files(tmp_path):
    write_json(str(tmp_path / "nested" / "a.json"), {"b": 1, "a": [0.5]})
    write_csv(str(tmp_path / "nested" / "t.csv"), pd.DataFrame({"x": [1.0, 2.0]}))
    assert sorted(p.name for p in (tmp_path / "nested").iterdir()) == ["a.json", "t.csv"]
    assert json.loads((tmp_path / "nested" / "a.json").read_text(encoding="utf-8")) == {"a": [0.5], "b": 1}
    assert pd.read_csv(tmp_path / "nested" / "t.csv")["x"].tolist() == [1.0, 2.0]
