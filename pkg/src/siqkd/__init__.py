"""Silicon BB84 transmitter and link simulator.

Models a monolithic silicon polarization-encoding QKD transmitter, a
lossy fiber/WDM channel and single-photon receivers, and runs BB84
sessions either analytically or by Monte Carlo photon counting.
"""

from ._kernel import BACKEND as KERNEL_BACKEND
from .channels import ChannelPlan
from .detection import DetectorSpec, ReceiverSpec, simulate_detection
from .link import LinkSpec, LossElement, PolarizationRotation
from .optics import (BB84_STATES, JonesVector, PhaseSettings, SourceSpec,
                     bb84_settings, calibrate_tops, mean_photon_number,
                     prepare_state)
from .protocol import (ChannelFilter, SessionConfig, SessionResult,
                       aes_gcm_capacity, binary_entropy, run_session,
                       secret_fraction, skr_from_rkr)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "ChannelPlan", "DetectorSpec", "ReceiverSpec",
    "simulate_detection", "LinkSpec", "LossElement",
    "PolarizationRotation", "BB84_STATES", "JonesVector", "PhaseSettings",
    "SourceSpec", "bb84_settings", "calibrate_tops", "mean_photon_number",
    "prepare_state", "ChannelFilter", "SessionConfig", "SessionResult",
    "aes_gcm_capacity", "binary_entropy", "run_session",
    "secret_fraction", "skr_from_rkr", "__version__",
]
