"""Tests for the transmitter photonics model.

Reference values were frozen from independent calculations: Gaussian
passband fractions from adaptive quadrature, the power-law L-I points by
hand, and the photon-number chain recomputed step by step outside the
package.
"""

import math

import numpy as np
import pytest

from siqkd import optics
from siqkd.optics import (BB84_STATES, CalibrationError, JonesVector,
                          MMI_MATRIX, PhaseSettings, PulseShape,
                          SimulatedTransmitter, SourceSpec, bb84_settings,
                          calibrate_tops, carve_amplitude, decoy_sequence,
                          led_power_dbm, mean_photon_number, mmi2x2,
                          prepare_state, spectral_fraction)


class TestJonesVector:
    def test_normalization(self):
        v = JonesVector(3.0, 4.0j).normalized()
        assert v.power() == pytest.approx(1.0, abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            JonesVector(0.0, 0.0).normalized()

    def test_fidelity_global_phase_invariant(self):
        a = JonesVector(1.0, 0.0)
        b = JonesVector(np.exp(1.3j), 0.0)
        assert a.fidelity(b) == pytest.approx(1.0, abs=1e-12)

    def test_stokes_poles(self):
        np.testing.assert_allclose(BB84_STATES["H"].stokes(), [1, 0, 0],
                                   atol=1e-12)
        np.testing.assert_allclose(BB84_STATES["V"].stokes(), [-1, 0, 0],
                                   atol=1e-12)
        np.testing.assert_allclose(BB84_STATES["R"].stokes(), [0, 0, -1],
                                   atol=1e-12)
        np.testing.assert_allclose(BB84_STATES["L"].stokes(), [0, 0, 1],
                                   atol=1e-12)


class TestMmi:
    def test_unitary(self):
        np.testing.assert_allclose(
            MMI_MATRIX.conj().T @ MMI_MATRIX, np.eye(2), atol=1e-15)

    def test_pinned_convention(self):
        out_a, out_b = mmi2x2(1.0, 0.0)
        s = 1.0 / math.sqrt(2.0)
        assert out_a == pytest.approx(s, abs=1e-15)
        assert out_b == pytest.approx(1j * s, abs=1e-15)

    def test_power_conservation(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            oa, ob = mmi2x2(a, b)
            assert (abs(oa) ** 2 + abs(ob) ** 2
                    == pytest.approx(abs(a) ** 2 + abs(b) ** 2, rel=1e-12))


class TestStatePreparation:
    @pytest.mark.parametrize("symbol", ["H", "V", "R", "L"])
    def test_bb84_settings_hit_targets(self, symbol):
        state = prepare_state(bb84_settings(symbol))
        assert state.fidelity(BB84_STATES[symbol]) >= 1.0 - 1e-9

    def test_mutual_unbiasedness(self):
        for a in ("H", "V"):
            for b in ("R", "L"):
                got = prepare_state(bb84_settings(a)).fidelity(
                    prepare_state(bb84_settings(b)))
                assert got == pytest.approx(0.5, abs=1e-9)

    def test_orthogonality_within_basis(self):
        for a, b in (("H", "V"), ("R", "L")):
            got = prepare_state(bb84_settings(a)).fidelity(
                prepare_state(bb84_settings(b)))
            assert got == pytest.approx(0.0, abs=1e-9)

    def test_tops_compensates_static_offset(self):
        alpha = 0.8234
        base = bb84_settings("R")
        compensated = PhaseSettings(
            phi_pm1=base.phi_pm1, phi_pm2x=base.phi_pm2x,
            phi_pm2y=base.phi_pm2y, phi_tops=-alpha)
        state = prepare_state(compensated, alpha_offset=alpha)
        assert state.fidelity(BB84_STATES["R"]) >= 1.0 - 1e-12

    def test_unknown_symbol_rejected(self):
        with pytest.raises(ValueError):
            bb84_settings("D")

    def test_full_poincare_coverage(self):
        # random phase triples must stay normalized and span the sphere
        rng = np.random.default_rng(11)
        stokes = []
        for _ in range(200):
            phases = PhaseSettings(*rng.uniform(0, 2 * math.pi, size=4))
            v = prepare_state(phases)
            assert v.power() == pytest.approx(1.0, abs=1e-12)
            stokes.append(v.stokes())
        spread = np.ptp(np.array(stokes), axis=0)
        assert np.all(spread > 1.0)

    def test_canonical_rejects_non_finite(self):
        with pytest.raises(ValueError):
            PhaseSettings(phi_pm1=math.nan).canonical()


class TestSourcePower:
    def test_power_law_points(self):
        spec = SourceSpec()
        assert led_power_dbm(spec, 25.0) == pytest.approx(-66.9, abs=1e-12)
        assert led_power_dbm(spec, 50.0) == pytest.approx(
            -63.88970004336019, abs=1e-9)
        assert led_power_dbm(spec, 10.0) == pytest.approx(
            -70.87940008672038, abs=1e-9)

    def test_zero_and_negative_current(self):
        spec = SourceSpec()
        assert led_power_dbm(spec, 0.0) == -math.inf
        with pytest.raises(ValueError):
            led_power_dbm(spec, -1.0)

    def test_temperature_derating(self):
        spec = SourceSpec(temp_derating_db_per_c=0.1)
        hot = led_power_dbm(spec, 25.0, temperature_c=35.0)
        assert hot == pytest.approx(-66.9 - 1.0, abs=1e-12)


class TestSpectralFraction:
    # frozen from independent Gaussian quadrature
    def test_frozen_values(self):
        spec44 = SourceSpec(fwhm_thz=4.4)
        assert spectral_fraction(spec44, 193.4, 0.2) == pytest.approx(
            0.04268131712922903, rel=1e-9)
        spec395 = SourceSpec(fwhm_thz=3.95)
        assert spectral_fraction(spec395, 193.4, 0.2) == pytest.approx(
            0.04753828209071005, rel=1e-9)
        assert spectral_fraction(spec395, 191.8, 0.2) == pytest.approx(
            0.03018764482580363, rel=1e-9)

    def test_bounds_and_monotonicity(self):
        spec = SourceSpec()
        widths = np.linspace(0.05, 40.0, 60)
        fracs = [spectral_fraction(spec, 193.4, w) for w in widths]
        assert all(0.0 <= f <= 1.0 for f in fracs)
        assert all(b >= a for a, b in zip(fracs, fracs[1:]))
        assert fracs[-1] == pytest.approx(1.0, abs=1e-6)

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            spectral_fraction(SourceSpec(), 193.4, 0.0)


class TestMeanPhotonNumber:
    def test_frozen_chain(self):
        # independently recomputed: -66.9 dBm anchor, -19.5 dB on-chip,
        # +3.2676 dB forward-coupling offset, -0.8 dB filter, 4.754% of
        # the spectrum in band, photon energy at 193.4 THz, 100 MHz clock
        spec = SourceSpec(fwhm_thz=3.95,
                          coupling_asymmetry_db=-3.267602748271779)
        mu = mean_photon_number(spec, 193.4, 0.2, 0.8)
        assert mu == pytest.approx(0.015, rel=1e-9)

    def test_monotone_in_loss_knobs(self):
        base = SourceSpec(fwhm_thz=3.95, coupling_asymmetry_db=-3.27)
        mu0 = mean_photon_number(base, 193.4, 0.2, 0.8)
        assert mean_photon_number(
            base.with_overrides(pic_loss_db=20.5), 193.4, 0.2, 0.8) < mu0
        assert mean_photon_number(
            base.with_overrides(coupling_asymmetry_db=-2.27),
            193.4, 0.2, 0.8) < mu0
        assert mean_photon_number(base, 193.4, 0.2, 1.8) < mu0
        assert mean_photon_number(base, 193.4, 0.1, 0.8) < mu0

    def test_scales_with_current(self):
        spec = SourceSpec()
        mu_lo = mean_photon_number(spec, 193.4, 0.2, 0.8,
                                   forward_current_ma=12.5)
        mu_hi = mean_photon_number(spec, 193.4, 0.2, 0.8,
                                   forward_current_ma=25.0)
        assert mu_hi == pytest.approx(2.0 * mu_lo, rel=1e-12)
        assert mean_photon_number(spec, 193.4, 0.2, 0.8,
                                  forward_current_ma=0.0) == 0.0


class TestCalibration:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(3)
        for alpha in rng.uniform(0.0, 2.0 * math.pi, size=25):
            device = SimulatedTransmitter(alpha)
            phi = calibrate_tops(device)
            assert abs(device.imbalance(phi)) < 1e-6

    def test_noisy_recovery_within_phase_tolerance(self):
        rng = np.random.default_rng(5)
        for k, alpha in enumerate(rng.uniform(0.0, 2 * math.pi, size=10)):
            device = SimulatedTransmitter(
                alpha, noise_fraction=0.01,
                rng=np.random.default_rng(100 + k))
            phi = calibrate_tops(device)
            # distance to the nearest balance root of sin(phi + alpha)
            err = abs((phi + alpha + math.pi / 2) % math.pi - math.pi / 2)
            assert err < 0.05

    def test_invalid_tolerance(self):
        with pytest.raises(ValueError):
            calibrate_tops(SimulatedTransmitter(0.1), tolerance=0.0)


class TestPulseShaping:
    def test_carve_peak_and_symmetry(self):
        shape = PulseShape()
        assert carve_amplitude(0.5, shape) == pytest.approx(1.0)
        assert carve_amplitude(0.3, shape) == pytest.approx(
            carve_amplitude(0.7, shape), rel=1e-12)
        assert carve_amplitude(0.0, shape) < 0.02

    def test_decoy_sequence_statistics(self):
        shape = PulseShape(decoy_probability=0.25, decoy_ratio=0.5)
        seq = decoy_sequence(100_000, shape, seed=9)
        assert set(np.unique(seq)) == {0.5, 1.0}
        frac = np.mean(seq == 0.5)
        assert frac == pytest.approx(0.25, abs=0.01)

    def test_decoy_sequence_deterministic(self):
        shape = PulseShape(decoy_probability=0.1)
        a = decoy_sequence(1000, shape, seed=4)
        b = decoy_sequence(1000, shape, seed=4)
        np.testing.assert_array_equal(a, b)
