import math

import numpy as np
import pytest

from analysis.decoding import (
    REPORT_COLUMNS,
    bin_resolution,
    decode_phase,
    decode_total_energy,
    find_peaks,
    gap_report,
    phase_aliases,
)
from quantum.qpde_circuits import phase_kernel
from quantum.statevector_engine import OutcomeDistribution
from utils import PhaseAmbiguityError, QpdeInputError


def _dist(probabilities) -> OutcomeDistribution:
    p = np.asarray(probabilities, dtype=float)
    return OutcomeDistribution(p / p.sum(), int(math.log2(p.size)))


class TestDecodePhase:
    def test_wrapped_bin_gives_positive_gap(self):
        estimate = decode_phase(3945, 12, 10.0)
        assert estimate.delta_e == pytest.approx(0.023163, abs=1e-6)
        assert estimate.delta_phi == pytest.approx(3945 / 4096)
        assert estimate.resolution == pytest.approx(2 * math.pi / (4096 * 10.0))

    def test_zero_bin_is_zero_gap(self):
        assert decode_phase(0, 12, 10.0).delta_e == 0.0

    def test_small_phase_gives_negative_gap(self):
        assert decode_phase(64, 8, 1.0).delta_e == pytest.approx(-2 * math.pi * 0.25)

    def test_band_edges_are_unambiguous(self):
        decode_phase(192, 8, 1.0)
        with pytest.raises(PhaseAmbiguityError):
            decode_phase(65, 8, 1.0)
        with pytest.raises(PhaseAmbiguityError):
            decode_phase(191, 8, 1.0)

    def test_half_phase_is_ambiguous(self):
        with pytest.raises(PhaseAmbiguityError, match="t=10"):
            decode_phase(2048, 12, 10.0)

    def test_bin_out_of_range(self):
        with pytest.raises(QpdeInputError):
            decode_phase(4096, 12, 10.0)

    def test_time_must_be_positive(self):
        with pytest.raises(QpdeInputError):
            decode_phase(1, 4, 0.0)

    def test_aliases_differ_by_one_period(self):
        low, high = phase_aliases(100, 8, 2.0)
        assert high - low == pytest.approx(2 * math.pi / 2.0)


def test_total_energy_uses_upper_half_as_negative_phase():
    assert decode_total_energy(3, 8, 1.0) == pytest.approx(-2 * math.pi * 3 / 256)
    assert decode_total_energy(250, 8, 1.0, identity_coefficient=-1.0) == pytest.approx(2 * math.pi * 6 / 256 - 1.0)
    assert decode_total_energy(128, 8, 1.0) == pytest.approx(-math.pi)


def test_bin_resolution():
    assert bin_resolution(10, 10.0) == pytest.approx(2 * math.pi / 10240)


class TestFindPeaks:
    def test_point_mass(self):
        p = np.zeros(64)
        p[17] = 1.0
        peaks = find_peaks(_dist(p))
        assert [(pk.bin, pk.mass) for pk in peaks] == [(17, 1.0)]

    def test_two_kernels_sorted_by_mass(self):
        p = 0.7 * phase_kernel(0.1234, 8) + 0.3 * phase_kernel(0.6789, 8)
        peaks = find_peaks(_dist(p))
        assert [pk.bin for pk in peaks] == [round(0.1234 * 256), round(0.6789 * 256)]
        assert peaks[0].mass > 0.7 * 0.8
        assert peaks[1].mass > 0.3 * 0.8

    def test_peak_wraps_around_zero(self):
        p = np.full(16, 1e-6)
        p[0], p[15], p[1] = 0.5, 0.3, 0.2
        peaks = find_peaks(_dist(p))
        assert peaks[0].bin == 0
        assert peaks[0].mass == pytest.approx(1.0, abs=1e-4)

    def test_shared_neighbour_counts_once(self):
        p = np.array([0.0, 0.4, 0.2, 0.3, 0.0, 0.0, 0.1, 0.0])
        peaks = find_peaks(_dist(p), min_mass=0.05, window=1)
        assert [pk.bin for pk in peaks] == [1, 3, 6]
        np.testing.assert_allclose([pk.mass for pk in peaks], [0.6, 0.3, 0.1])
        assert sum(pk.mass for pk in peaks) == pytest.approx(1.0)

    def test_uniform_distribution_has_no_peak(self):
        assert find_peaks(_dist(np.ones(256))) == []

    def test_min_mass_range(self):
        with pytest.raises(QpdeInputError):
            find_peaks(_dist(np.ones(4)), min_mass=1.5)


class TestGapReport:
    def test_empty_report_keeps_columns(self):
        report = gap_report(_dist(np.ones(256)), 8, 1.0)
        assert report.empty
        assert list(report.columns) == REPORT_COLUMNS

    def test_labels_nearest_oracle_gap(self):
        # T1-S0 = +0.03 → Δφ = 1 - 0.3/2π
        phi = (-0.03 * 10 / (2 * math.pi)) % 1.0
        report = gap_report(_dist(phase_kernel(phi, 10)), 10, 10.0, {"T1-S0": 0.03, "T1-S2": -0.26})
        row = report.iloc[0]
        assert row["label"] == "T1-S0"
        assert abs(row["deviation"]) <= row["resolution"]
        assert not row["ambiguous"]
        assert row["bitstring"] == format(int(row["bin"]), "010b")

    def test_ambiguous_peak_takes_alias_nearest_oracle(self):
        phi = (0.26 * 10 / (2 * math.pi)) % 1.0
        oracle = {"T1-S0": 0.03, "T1-S2": -0.26}
        report = gap_report(_dist(phase_kernel(phi, 10)), 10, 10.0, oracle)
        row = report.iloc[0]
        assert bool(row["ambiguous"])
        assert row["label"] == "T1-S2"
        assert row["delta_E_hartree"] == pytest.approx(-0.26, abs=row["resolution"])

    def test_without_oracle_labels_are_blank(self):
        p = np.zeros(256)
        p[10] = 1.0
        report = gap_report(_dist(p), 8, 1.0)
        assert report.iloc[0]["label"] == ""
        assert math.isnan(report.iloc[0]["deviation"])
