"""Tests for the sweeps, parameter fitting and table IO."""

from dataclasses import replace

import numpy as np
import pytest

from siqkd import presets
from siqkd.experiments import (AnchorVerdict, FitError, ScenarioConfig,
                               SweepTable, _crossing, channel_counts,
                               fit_parameters, longrun, read_csv,
                               summary_report, sweep_channel, sweep_ob,
                               sweep_reach, write_csv)


class TestScenarioConfig:
    def test_sweep_values(self):
        cfg = ScenarioConfig(scenario="sweep_ob", sweep_start=0.0,
                             sweep_stop=4.0, sweep_step=2.0,
                             base=presets.budget_config())
        assert cfg.sweep_values() == [0.0, 2.0, 4.0]

    def test_validation(self):
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="sweep_ob", sweep_start=5.0,
                           sweep_stop=1.0)
        with pytest.raises(ValueError):
            ScenarioConfig(scenario="sweep_reach", sweep_stop=5.0,
                           sweep_step=0.0)


class TestCrossing:
    def test_interpolated(self):
        assert _crossing([0.0, 1.0, 2.0], [0.05, 0.10, 0.15],
                         limit=0.11) == pytest.approx(1.2)

    def test_none_when_never_crossed(self):
        assert _crossing([0.0, 1.0], [0.01, 0.02]) is None


class TestSweeps:
    def test_ob_sweep_crossing_near_external_anchor(self):
        cfg = ScenarioConfig(
            scenario="sweep_ob", sweep_start=0.0, sweep_stop=22.0,
            sweep_step=0.5,
            base=presets.budget_config(0.0, "external_laser"))
        table = sweep_ob(cfg)
        assert table.crossing == pytest.approx(16.8, abs=0.1)
        qbers = table.column("qber")
        assert all(b >= a for a, b in zip(qbers, qbers[1:]))

    def test_reach_sweep_crossing(self):
        cfg = ScenarioConfig(scenario="sweep_reach", sweep_start=0.0,
                             sweep_stop=50.0, sweep_step=1.0,
                             base=presets.reach_config(0.0))
        table = sweep_reach(cfg)
        assert table.crossing == pytest.approx(30.9, abs=0.5)
        loss = table.column("loss_db")
        assert loss[10] == pytest.approx(10 * presets.LAB_FIBER_DB_PER_KM)

    def test_channel_sweep_counts(self):
        table = sweep_channel()
        assert len(table.rows) == 36
        secure, fast = channel_counts(table)
        assert abs(secure - 32) <= 2
        assert abs(fast - 11) <= 2
        # the anchor channel is the strongest
        best = max(table.rows, key=lambda r: r["skr"])
        assert best["channel"] == 34
        for row in table.rows:
            assert row["skr_per_basis"] == pytest.approx(0.5 * row["skr"])
            assert row["skr_four_detector"] == pytest.approx(
                2.0 * row["skr_per_basis"])

    def test_longrun_series(self):
        config = replace(presets.field_config(drift=True),
                         duration_s=1800.0, realign_schedule=(900.0,),
                         series_bin_s=300.0)
        table = longrun(config)
        assert len(table.rows) == 6
        assert table.column("realigned") == [0, 0, 0, 1, 0, 0]


class TestFitting:
    def test_fit_reproduces_baked_constants(self):
        fitted = fit_parameters()
        assert fitted.fwhm_thz == pytest.approx(presets.FITTED_FWHM_THZ,
                                                abs=1e-9)
        assert fitted.coupling_asymmetry_db == pytest.approx(
            presets.FITTED_COUPLING_ASYMMETRY_DB, abs=1e-9)
        assert fitted.lab_insertion_db == pytest.approx(
            presets.FITTED_LAB_INSERTION_DB, abs=1e-9)
        assert fitted.lab_intrinsic_error == pytest.approx(
            presets.FITTED_LAB_INTRINSIC_ERROR, abs=1e-12)
        assert fitted.lab_background_hz == pytest.approx(
            presets.FITTED_LAB_BACKGROUND_HZ, rel=1e-6)
        assert fitted.field_insertion_db == pytest.approx(
            presets.FITTED_FIELD_INSERTION_DB, abs=1e-9)
        assert fitted.field_intrinsic_error == pytest.approx(
            presets.FITTED_FIELD_INTRINSIC_ERROR, abs=1e-12)
        assert fitted.saturation_intrinsic_error == pytest.approx(
            presets.FITTED_SATURATION_INTRINSIC_ERROR, abs=1e-12)
        assert all(abs(v) < 1e-3 for v in fitted.residuals.values())

    def test_fit_without_fwhm_scan(self):
        fitted = fit_parameters(fit_fwhm=False)
        assert fitted.fwhm_thz == presets.FITTED_FWHM_THZ
        assert fitted.coupling_asymmetry_db == pytest.approx(
            presets.FITTED_COUPLING_ASYMMETRY_DB, abs=1e-9)


class TestTableIO:
    def test_csv_roundtrip_exact_floats(self, tmp_path):
        cfg = ScenarioConfig(scenario="sweep_ob", sweep_start=0.0,
                             sweep_stop=10.0, sweep_step=2.5,
                             base=presets.budget_config(0.0))
        table = sweep_ob(cfg)
        path = tmp_path / "sweep.csv"
        write_csv(table, path)
        back = read_csv(path)
        assert back.columns == table.columns
        assert len(back.rows) == len(table.rows)
        for a, b in zip(table.rows, back.rows):
            for key in table.columns:
                assert b[key] == a[key]

    def test_csv_roundtrip_channel_table(self, tmp_path):
        table = sweep_channel()
        path = tmp_path / "channels.csv"
        write_csv(table, path)
        back = read_csv(path)
        assert [r["channel"] for r in back.rows] == \
            [r["channel"] for r in table.rows]
        assert all(b["skr"] == a["skr"]
                   for a, b in zip(table.rows, back.rows))


class TestSummary:
    def test_verdict_lines(self):
        good = AnchorVerdict("raw key rate", 51200.0, 51200.0, 100.0)
        bad = AnchorVerdict("qber", 0.0638, 0.08, 0.005)
        assert good.passed and not bad.passed
        report = summary_report([good, bad])
        assert "[PASS] raw key rate" in report
        assert "[FAIL] qber" in report
        assert "1/2 anchors reproduced" in report
