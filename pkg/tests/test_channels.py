"""Tests for the DWDM grid channel planner."""

import pytest

from siqkd.channels import (ANCHOR_CHANNEL, ANCHOR_FREQ_THZ, ChannelPlan)
from siqkd.optics import C_NM_THZ


class TestChannelPlan:
    def test_default_plan_size(self):
        plan = ChannelPlan()
        assert len(plan) == 36

    def test_endpoints_snap_to_grid(self):
        rows = ChannelPlan().channels()
        first, last = rows[0], rows[-1]
        assert first == (2, pytest.approx(190.2), pytest.approx(
            1576.1958885383804))
        assert last == (72, pytest.approx(197.2), pytest.approx(
            1520.2457302231235))

    def test_anchor_channel_present(self):
        rows = ChannelPlan().channels()
        by_number = {n: f for n, f, _ in rows}
        assert by_number[ANCHOR_CHANNEL] == pytest.approx(ANCHOR_FREQ_THZ)

    def test_spacing_uniform(self):
        freqs = ChannelPlan().frequencies_thz()
        gaps = [b - a for a, b in zip(freqs, freqs[1:])]
        assert all(g == pytest.approx(0.2, abs=1e-12) for g in gaps)

    def test_channel_numbers_even_200ghz(self):
        numbers = [n for n, _, _ in ChannelPlan().channels()]
        assert numbers == list(range(2, 73, 2))

    def test_wavelengths_consistent(self):
        for _, f, wl in ChannelPlan().channels():
            assert wl == pytest.approx(C_NM_THZ / f, rel=1e-12)

    def test_plan_roundtrips_through_quoted_wavelengths(self):
        # rebuilding the plan from the (rounded) outer wavelengths it
        # reports must give the same grid
        rows = ChannelPlan().channels()
        again = ChannelPlan(start_nm=round(rows[-1][2], 2),
                            stop_nm=round(rows[0][2], 2))
        assert again.frequencies_thz() == ChannelPlan().frequencies_thz()

    def test_100ghz_grid(self):
        plan = ChannelPlan(grid_spacing_ghz=100.0)
        assert len(plan) == 71
        numbers = [n for n, _, _ in plan.channels()]
        assert numbers == list(range(2, 73))

    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelPlan(grid_spacing_ghz=0.0)
        with pytest.raises(ValueError):
            ChannelPlan(start_nm=1550.0, stop_nm=1540.0)
