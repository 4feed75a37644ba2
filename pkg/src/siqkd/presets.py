"""Benchmark anchors of the modeled hardware and calibrated defaults.

The anchors are the measured operating points of the transmitter/link this
package models; the FITTED_* values are the free parameters of the model
solved against those anchors (see experiments.fit_parameters, which
regenerates them).  Scenario builders assemble ready-to-run session
configurations for each experiment.
"""

from __future__ import annotations

from .channels import ANCHOR_FREQ_THZ, ChannelPlan
from .detection import (FOUR_DETECTOR_PASSIVE, TWO_DETECTOR_SWITCHED,
                        DetectorSpec, ReceiverSpec)
from .link import LinkSpec, LossElement
from .optics import SourceSpec
from .protocol import ChannelFilter, SessionConfig

# ---------------------------------------------------------------------------
# measured anchors
# ---------------------------------------------------------------------------

MU_ANCHOR = 0.015  # photons/symbol launched in channel 34
SYMBOL_RATE_HZ = 100e6

RKR_0DB_EXTERNAL = 51.2e3  # sifted rate, external laser, 0 dB budget
QBER_0DB_EXTERNAL = 0.0638
QBER_SATURATION = 0.0268  # detector-saturation operating point
OB_CROSSING_EXTERNAL_DB = 16.8  # budget where QBER hits the 11% limit
MU_EXTERNAL = 0.1

LAB_FIBER_DB_PER_KM = 0.277
WDM_FILTER_LOSS_DB = 0.8
TUNABLE_FILTER_LOSS_DB = 3.9
CHANNEL_SPAN_KM = 4.3
CHANNEL_WIDTH_THZ = 0.2

FIELD_REACH_KM = 45.9
FIELD_LOSS_DB = 16.5
FIELD_RKR = 1.55e3
FIELD_QBER = 0.0505

# targets of the channel sweep: secure channels on the 200-GHz grid and
# channels whose four-detector secure rate clears 1 kb/s
CHANNEL_COUNT_SECURE = 32
CHANNEL_COUNT_1KBS = 11

# ---------------------------------------------------------------------------
# fitted model parameters (regenerate with `siqkd fit`)
# ---------------------------------------------------------------------------

FITTED_FWHM_THZ = 3.95
FITTED_COUPLING_ASYMMETRY_DB = -3.267602748271779
FITTED_LAB_INSERTION_DB = 5.806638919357464
FITTED_LAB_INTRINSIC_ERROR = 0.06263830124432357
FITTED_LAB_BACKGROUND_HZ = 24137.1169077042
FITTED_FIELD_INSERTION_DB = 8.61696667416347
FITTED_FIELD_INTRINSIC_ERROR = 0.03567219295080381
FITTED_SATURATION_INTRINSIC_ERROR = 0.01879215349722766

# in-band stray photons on the unfiltered deployed link; removed by the
# endpoint bandpass filter when present
FIELD_BACKGROUND_HZ = 1.0e5

# drift magnitude chosen so the QBER rises by roughly 1.5 percentage
# points per hour between realignments (fitted, not measured)
DRIFT_COEFF_RAD2_PER_S = 1.7e-5

# lab detectors: InGaAs avalanche photodiodes
LAB_DETECTORS = (
    DetectorSpec(efficiency=0.08, dark_rate_hz=251.0, dead_time_s=10e-6,
                 label="spad-1"),
    DetectorSpec(efficiency=0.08, dark_rate_hz=308.0, dead_time_s=10e-6,
                 label="spad-2"),
)

# field detectors: superconducting nanowires
FIELD_DETECTORS = (
    DetectorSpec(efficiency=0.65, dark_rate_hz=75.0, dead_time_s=50e-9,
                 label="snspd-1"),
    DetectorSpec(efficiency=0.65, dark_rate_hz=123.0, dead_time_s=50e-9,
                 label="snspd-2"),
)


def default_source(fwhm_thz: float = None,
                   coupling_asymmetry_db: float = None) -> SourceSpec:
    return SourceSpec(
        fwhm_thz=FITTED_FWHM_THZ if fwhm_thz is None else fwhm_thz,
        coupling_asymmetry_db=(FITTED_COUPLING_ASYMMETRY_DB
                               if coupling_asymmetry_db is None
                               else coupling_asymmetry_db),
        symbol_rate_hz=SYMBOL_RATE_HZ,
    )


def lab_receiver(insertion_loss_db: float = None,
                 scheme: str = TWO_DETECTOR_SWITCHED) -> ReceiverSpec:
    dets = LAB_DETECTORS if scheme == TWO_DETECTOR_SWITCHED else \
        LAB_DETECTORS + LAB_DETECTORS
    return ReceiverSpec(
        detectors=dets, basis_scheme=scheme,
        insertion_loss_db=(FITTED_LAB_INSERTION_DB
                           if insertion_loss_db is None
                           else insertion_loss_db),
        gate_fraction=0.5)


def field_receiver(insertion_loss_db: float = None) -> ReceiverSpec:
    return ReceiverSpec(
        detectors=FIELD_DETECTORS, basis_scheme=TWO_DETECTOR_SWITCHED,
        insertion_loss_db=(FITTED_FIELD_INSERTION_DB
                           if insertion_loss_db is None
                           else insertion_loss_db),
        gate_fraction=0.5)


def wdm_filter() -> ChannelFilter:
    return ChannelFilter(center_thz=ANCHOR_FREQ_THZ,
                         width_thz=CHANNEL_WIDTH_THZ,
                         loss_db=WDM_FILTER_LOSS_DB)


def tunable_filter(center_thz: float) -> ChannelFilter:
    return ChannelFilter(center_thz=center_thz,
                         width_thz=CHANNEL_WIDTH_THZ,
                         loss_db=TUNABLE_FILTER_LOSS_DB)


def budget_config(voa_db: float = 0.0, source_kind: str = "internal_sige",
                  **kwargs) -> SessionConfig:
    """Lab optical-budget emulation through a variable attenuator."""
    link = LinkSpec(elements=(LossElement.voa(voa_db),),
                    background_rate_hz=FITTED_LAB_BACKGROUND_HZ)
    return SessionConfig(
        symbol_rate_hz=SYMBOL_RATE_HZ, source=default_source(),
        source_kind=source_kind, mu_external=MU_EXTERNAL,
        channel_filter=wdm_filter(), link=link, receiver=lab_receiver(),
        intrinsic_error=FITTED_LAB_INTRINSIC_ERROR, **kwargs)


def reach_config(length_km: float, **kwargs) -> SessionConfig:
    """Lab fiber-spool reach test with the integrated source."""
    link = LinkSpec(
        elements=(LossElement.fiber(length_km, LAB_FIBER_DB_PER_KM),),
        background_rate_hz=FITTED_LAB_BACKGROUND_HZ)
    return SessionConfig(
        symbol_rate_hz=SYMBOL_RATE_HZ, source=default_source(),
        channel_filter=wdm_filter(), link=link, receiver=lab_receiver(),
        intrinsic_error=FITTED_LAB_INTRINSIC_ERROR, **kwargs)


def channel_config(center_thz: float, **kwargs) -> SessionConfig:
    """Wavelength-channel test through the tunable filter and a short
    spool; the tunable filter setup shows no measurable stray background.
    """
    link = LinkSpec(
        elements=(LossElement.fiber(CHANNEL_SPAN_KM, LAB_FIBER_DB_PER_KM),),
        background_rate_hz=0.0)
    return SessionConfig(
        symbol_rate_hz=SYMBOL_RATE_HZ, source=default_source(),
        channel_filter=tunable_filter(center_thz), link=link,
        receiver=lab_receiver(),
        intrinsic_error=FITTED_LAB_INTRINSIC_ERROR, **kwargs)


def field_config(endpoint_bpf: bool = True, drift: bool = False,
                 **kwargs) -> SessionConfig:
    """Deployed-fiber link with nanowire detectors."""
    link = LinkSpec(
        elements=(LossElement.fiber(
            FIELD_REACH_KM, FIELD_LOSS_DB / FIELD_REACH_KM),),
        drift_coefficient=DRIFT_COEFF_RAD2_PER_S if drift else 0.0,
        background_rate_hz=0.0 if endpoint_bpf else FIELD_BACKGROUND_HZ)
    return SessionConfig(
        symbol_rate_hz=SYMBOL_RATE_HZ, source=default_source(),
        channel_filter=wdm_filter(), link=link, receiver=field_receiver(),
        intrinsic_error=FITTED_FIELD_INTRINSIC_ERROR, **kwargs)


def default_channel_plan() -> ChannelPlan:
    return ChannelPlan()
