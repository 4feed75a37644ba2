"""Transmitter photonics: SiGe source, state preparation circuit, calibration.

Models a silicon QKD transmitter whose state-preparation circuit is a
Mach-Zehnder power splitter (phase stage PM1 between two 50:50 MMIs, plus a
thermo-optic trim phase) followed by independent output phases (PM2-X,
PM2-Y) on the TE and TM branches of a polarizing 2D grating coupler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

# speed of light in nm*THz (= m/s * 1e-3); convenient for nm <-> THz
C_NM_THZ = 299792.458
PLANCK_J_S = 6.62607015e-34

TWO_PI = 2.0 * math.pi

# 50:50 multi-mode interference coupler, pinned convention
MMI_MATRIX = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / math.sqrt(2.0)


class CalibrationError(RuntimeError):
    """Raised when the TOPS balance search does not converge."""


@dataclass(frozen=True)
class JonesVector:
    """Normalized complex field pair (TE, TM) of a fully polarized state."""

    ex: complex
    ey: complex

    def normalized(self) -> "JonesVector":
        norm = math.sqrt(abs(self.ex) ** 2 + abs(self.ey) ** 2)
        if norm == 0.0:
            raise ValueError("cannot normalize a zero Jones vector")
        return JonesVector(self.ex / norm, self.ey / norm)

    def power(self) -> float:
        return abs(self.ex) ** 2 + abs(self.ey) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.ex, self.ey], dtype=complex)

    def fidelity(self, other: "JonesVector") -> float:
        """Squared overlap |<a|b>|^2; global-phase invariant."""
        inner = np.conj(self.as_array()) @ other.as_array()
        return float(abs(inner) ** 2)

    def stokes(self) -> np.ndarray:
        """Unit Stokes vector (S1, S2, S3)."""
        ex, ey = self.ex, self.ey
        return np.array(
            [
                abs(ex) ** 2 - abs(ey) ** 2,
                2.0 * (np.conj(ex) * ey).real,
                2.0 * (np.conj(ex) * ey).imag,
            ]
        )


# the four BB84 symbols
STATE_H = JonesVector(1.0, 0.0)
STATE_V = JonesVector(0.0, 1.0)
STATE_R = JonesVector(1.0 / math.sqrt(2.0), -1.0j / math.sqrt(2.0))
STATE_L = JonesVector(1.0 / math.sqrt(2.0), 1.0j / math.sqrt(2.0))

BB84_STATES = {"H": STATE_H, "V": STATE_V, "R": STATE_R, "L": STATE_L}


@dataclass(frozen=True)
class PhaseSettings:
    """Drive phases of the four transmitter phase shifters, in radians."""

    phi_pm1: float = 0.0
    phi_pm2x: float = 0.0
    phi_pm2y: float = 0.0
    phi_tops: float = 0.0

    def canonical(self) -> "PhaseSettings":
        """Reduce every phase into [0, 2*pi)."""
        vals = [self.phi_pm1, self.phi_pm2x, self.phi_pm2y, self.phi_tops]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("phases must be finite")
        return PhaseSettings(*(v % TWO_PI for v in vals))


@dataclass(frozen=True)
class SourceSpec:
    """Forward-biased SiGe junction emitter plus on-chip loss bookkeeping.

    The L-I curve is a power law anchored at (anchor_current,
    anchor_power_dbm) measured at the rear 1D grating coupler; the
    emission spectrum is Gaussian.  coupling_asymmetry_db is the fitted
    offset between the forward (2D-GC) path and the rear-facet anchor; a
    negative value means the forward path carries more power than the
    rear facet.
    """

    anchor_current_ma: float = 25.0
    anchor_power_dbm: float = -66.9
    power_exponent: float = 1.0
    temperature_c: float = 25.0
    temp_derating_db_per_c: float = 0.0
    center_wavelength_nm: float = 1550.12
    fwhm_thz: float = 4.4
    symbol_rate_hz: float = 100e6
    pic_loss_db: float = 19.5
    coupling_asymmetry_db: float = 0.0

    def __post_init__(self):
        if self.fwhm_thz <= 0.0:
            raise ValueError("fwhm_thz must be positive")
        if self.symbol_rate_hz <= 0.0:
            raise ValueError("symbol_rate_hz must be positive")
        if self.pic_loss_db < 0.0:
            raise ValueError("pic_loss_db must be non-negative")

    def with_overrides(self, **kwargs) -> "SourceSpec":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class PulseShape:
    """Super-Gaussian carving envelope with optional decoy intensities."""

    order: int = 4
    carve_fraction: float = 0.5
    decoy_ratio: float = 0.5
    decoy_probability: float = 0.0

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be a positive integer")
        if not 0.0 < self.carve_fraction <= 1.0:
            raise ValueError("carve_fraction must be in (0, 1]")
        if not 0.0 < self.decoy_ratio <= 1.0:
            raise ValueError("decoy_ratio must be in (0, 1]")
        if not 0.0 <= self.decoy_probability <= 1.0:
            raise ValueError("decoy_probability must be in [0, 1]")


def led_power_dbm(spec: SourceSpec, forward_current_ma: float,
                  temperature_c: float | None = None) -> float:
    """Rear-facet emission power for a given drive current.

    Power law anchored at the spec's (current, power) point with a linear
    dB/degC temperature derating.  Returns -inf for zero drive.
    """
    if forward_current_ma < 0.0:
        raise ValueError("forward current must be non-negative")
    if forward_current_ma == 0.0:
        return -math.inf
    temp = spec.temperature_c if temperature_c is None else temperature_c
    return (
        spec.anchor_power_dbm
        + 10.0 * spec.power_exponent
        * math.log10(forward_current_ma / spec.anchor_current_ma)
        - spec.temp_derating_db_per_c * (temp - 25.0)
    )


def spectral_fraction(spec: SourceSpec, filter_center_thz: float,
                      filter_width_thz: float) -> float:
    """Fraction of the Gaussian emission inside a flat-top passband."""
    if filter_width_thz <= 0.0:
        raise ValueError("filter_width_thz must be positive")
    nu0 = C_NM_THZ / spec.center_wavelength_nm
    sigma = spec.fwhm_thz / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    lo = filter_center_thz - 0.5 * filter_width_thz
    hi = filter_center_thz + 0.5 * filter_width_thz
    root2 = math.sqrt(2.0)
    frac = 0.5 * (
        erf((hi - nu0) / (sigma * root2)) - erf((lo - nu0) / (sigma * root2))
    )
    return float(min(1.0, max(0.0, frac)))


def mean_photon_number(spec: SourceSpec, filter_center_thz: float,
                       filter_width_thz: float, filter_loss_db: float,
                       forward_current_ma: float | None = None) -> float:
    """Photons per symbol launched into the passband.

    Chains the emitter power law through the on-chip loss, the fitted
    forward-coupling offset, the filter insertion loss and the in-band
    spectral fraction, then divides by photon energy and symbol rate.
    """
    current = (
        spec.anchor_current_ma if forward_current_ma is None
        else forward_current_ma
    )
    p_dbm = led_power_dbm(spec, current)
    if p_dbm == -math.inf:
        return 0.0
    p_dbm -= spec.pic_loss_db + spec.coupling_asymmetry_db + filter_loss_db
    p_watt = 1e-3 * 10.0 ** (p_dbm / 10.0)
    p_inband = p_watt * spectral_fraction(spec, filter_center_thz,
                                          filter_width_thz)
    photon_energy = PLANCK_J_S * filter_center_thz * 1e12
    return p_inband / (photon_energy * spec.symbol_rate_hz)


def mmi2x2(in_a: complex, in_b: complex) -> tuple[complex, complex]:
    """Apply the 50:50 MMI unitary (1/sqrt2)[[1, i], [i, 1]]."""
    out = MMI_MATRIX @ np.array([in_a, in_b], dtype=complex)
    return complex(out[0]), complex(out[1])


def prepare_state(settings: PhaseSettings,
                  alpha_offset: float = 0.0) -> JonesVector:
    """Output polarization state of the transmitter circuit.

    Convention: unit input splits on an ideal 50:50 MMI; the upper arm
    picks up phi_pm1 + phi_tops + alpha_offset; the arms recombine on the
    pinned MMI; outputs X and Y then pick up phi_pm2x / phi_pm2y and feed
    the TE / TM ports of the polarizing combiner.  The TE power is
    sin^2(phi/2) with phi the total interferometer phase, so a 2*pi sweep
    of phi_pm1 reaches every splitting ratio and phi_pm2y - phi_pm2x sets
    the relative phase: the whole Poincare sphere is reachable.
    """
    settings = settings.canonical()
    a, b = mmi2x2(1.0, 0.0)
    phi = settings.phi_pm1 + settings.phi_tops + alpha_offset
    a *= complex(math.cos(phi), math.sin(phi))
    out_x, out_y = mmi2x2(a, b)
    out_x *= complex(math.cos(settings.phi_pm2x), math.sin(settings.phi_pm2x))
    out_y *= complex(math.cos(settings.phi_pm2y), math.sin(settings.phi_pm2y))
    return JonesVector(out_x, out_y).normalized()


# Phase table realizing H, V, R, L (up to global phase) under the pinned
# MMI convention; verified against prepare_state by test.
_BB84_TABLE = {
    "H": PhaseSettings(phi_pm1=math.pi),
    "V": PhaseSettings(phi_pm1=0.0),
    "R": PhaseSettings(phi_pm1=math.pi / 2.0, phi_pm2y=3.0 * math.pi / 2.0),
    "L": PhaseSettings(phi_pm1=math.pi / 2.0, phi_pm2y=math.pi / 2.0),
}


def bb84_settings(symbol: str) -> PhaseSettings:
    """Phase table entry for one of the four BB84 symbols H, V, R, L."""
    try:
        return _BB84_TABLE[symbol]
    except KeyError:
        raise ValueError(f"unknown BB84 symbol {symbol!r}") from None


class SimulatedTransmitter:
    """Transmitter with a hidden static interferometer offset.

    Exposes only the two monitor photocurrents seen under reverse light
    injection (diagonal injection state), as available during factory
    calibration; the offset itself stays private to the instance.
    """

    def __init__(self, alpha_offset: float, noise_fraction: float = 0.0,
                 rng: np.random.Generator | None = None):
        self._alpha = float(alpha_offset)
        self.noise_fraction = float(noise_fraction)
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def monitor_currents(self, phi_tops: float) -> tuple[float, float]:
        """Photocurrents of the two monitor diodes for a TOPS phase."""
        theta = phi_tops + self._alpha
        pin1 = 0.5 * (1.0 + math.sin(theta))
        pin2 = 0.5 * (1.0 - math.sin(theta))
        if self.noise_fraction > 0.0:
            pin1 *= 1.0 + self.noise_fraction * self.rng.standard_normal()
            pin2 *= 1.0 + self.noise_fraction * self.rng.standard_normal()
        return pin1, pin2

    def imbalance(self, phi_tops: float, reads: int = 1) -> float:
        """Normalized monitor imbalance, optionally averaged over reads."""
        acc = 0.0
        for _ in range(reads):
            pin1, pin2 = self.monitor_currents(phi_tops)
            acc += (pin1 - pin2) / (pin1 + pin2)
        return acc / reads


def calibrate_tops(device: SimulatedTransmitter, tolerance: float = 1e-6,
                   max_iter: int = 64, reads_per_eval: int = 4) -> float:
    """Find the TOPS phase that balances the two monitor photocurrents.

    Coarse 16-point scan over one 2*pi period to bracket a sign change of
    the imbalance, then bisection.  Derivative-free, so it tolerates the
    pi-periodic ambiguity of the balance condition: the returned phase
    satisfies sin(phi + alpha) = 0 at either of the two roots.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    n_scan = 16
    grid = [k * TWO_PI / n_scan for k in range(n_scan + 1)]
    vals = [device.imbalance(p, reads_per_eval) for p in grid]
    lo = hi = None
    for k in range(n_scan):
        if vals[k] == 0.0:
            return grid[k] % TWO_PI
        if vals[k] * vals[k + 1] < 0.0:
            lo, hi = grid[k], grid[k + 1]
            f_lo = vals[k]
            break
    if lo is None:
        raise CalibrationError("no sign change of the monitor imbalance "
                               "found over one period")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = device.imbalance(mid, reads_per_eval)
        if f_mid == 0.0:
            return mid % TWO_PI
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    phi = 0.5 * (lo + hi)
    if device.noise_fraction == 0.0 and \
            abs(device.imbalance(phi)) >= tolerance:
        raise CalibrationError(
            f"imbalance {device.imbalance(phi):.3e} above tolerance "
            f"{tolerance:.3e} after {max_iter} iterations")
    return phi % TWO_PI


def carve_amplitude(t: float, shape: PulseShape) -> float:
    """Super-Gaussian pulse envelope at symbol fraction t, peak 1 at 0.5."""
    x = (t - 0.5) / (shape.carve_fraction / 2.0)
    return math.exp(-(x ** (2 * shape.order)))


def decoy_sequence(n: int, shape: PulseShape, seed: int) -> np.ndarray:
    """Per-symbol intensity factors with randomly interleaved decoys."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    return np.where(u < shape.decoy_probability, shape.decoy_ratio, 1.0)
