"""Channel between transmitter output and receiver input.

Loss elements (VOA, fiber spans, filters, connectors), slow polarization
drift modeled as isotropic angular diffusion on the Poincare sphere, and a
wavelength-flat in-band background photon rate at the receiver input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .optics import JonesVector

_KINDS = ("voa", "fiber", "filter", "connector")


@dataclass(frozen=True)
class LossElement:
    kind: str
    loss_db: float = 0.0
    length_km: float = 0.0
    attenuation_db_per_km: float = 0.0
    center_thz: float = 0.0
    width_thz: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown loss element kind {self.kind!r}")
        if self.loss_db < 0.0:
            raise ValueError("loss_db must be non-negative")

    @staticmethod
    def fiber(length_km: float,
              attenuation_db_per_km: float) -> "LossElement":
        return LossElement(
            kind="fiber",
            loss_db=length_km * attenuation_db_per_km,
            length_km=length_km,
            attenuation_db_per_km=attenuation_db_per_km,
        )

    @staticmethod
    def voa(loss_db: float) -> "LossElement":
        return LossElement(kind="voa", loss_db=loss_db)

    @staticmethod
    def filter(loss_db: float, center_thz: float = 0.0,
               width_thz: float = 0.0) -> "LossElement":
        return LossElement(kind="filter", loss_db=loss_db,
                           center_thz=center_thz, width_thz=width_thz)


@dataclass(frozen=True)
class LinkSpec:
    """Ordered loss chain plus drift and background parameters.

    background_rate_hz is the in-band photon rate reaching the receiver
    input; it is not attenuated by the chain (receiver-side stray light).
    """

    elements: tuple[LossElement, ...] = field(default_factory=tuple)
    drift_coefficient: float = 0.0  # rad^2/s
    background_rate_hz: float = 0.0

    def with_extra(self, *extra: LossElement) -> "LinkSpec":
        return replace(self, elements=self.elements + tuple(extra))


def total_budget(link: LinkSpec) -> float:
    """Total link loss in dB (sum over elements)."""
    return sum(e.loss_db for e in link.elements)


def attenuate(mu: float, loss_db: float) -> float:
    """Scale a mean photon number by a dB loss."""
    if mu < 0.0:
        raise ValueError("mu must be non-negative")
    if loss_db < 0.0:
        raise ValueError("loss_db must be non-negative")
    return mu * 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class PolarizationRotation:
    """SU(2)-like rotation acting on Jones vectors."""

    unitary: np.ndarray = field(
        default_factory=lambda: np.eye(2, dtype=complex))

    @staticmethod
    def identity() -> "PolarizationRotation":
        return PolarizationRotation()

    @staticmethod
    def about_axis(axis, angle: float) -> "PolarizationRotation":
        """Rotation by `angle` on the Poincare sphere about a unit axis."""
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        paulis = np.array([
            [[1.0, 0.0], [0.0, -1.0]],
            [[0.0, 1.0], [1.0, 0.0]],
            [[0.0, -1.0j], [0.0 + 1.0j, 0.0]],
        ], dtype=complex)
        n_sigma = np.tensordot(axis, paulis, axes=1)
        half = 0.5 * angle
        u = math.cos(half) * np.eye(2) - 1.0j * math.sin(half) * n_sigma
        return PolarizationRotation(u)

    def compose(self, other: "PolarizationRotation") -> "PolarizationRotation":
        """self applied after other, re-unitarized."""
        u = self.unitary @ other.unitary
        w, _, vh = np.linalg.svd(u)
        return PolarizationRotation(w @ vh)

    def unitarity_defect(self) -> float:
        u = self.unitary
        return float(np.max(np.abs(u.conj().T @ u - np.eye(2))))


def random_axis(rng: np.random.Generator) -> np.ndarray:
    """Uniform random direction on the sphere."""
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def drift_step(current: PolarizationRotation, dt: float, coeff: float,
               rng: np.random.Generator) -> PolarizationRotation:
    """One diffusion step: random-axis rotation of angle ~ |N(0, coeff*dt)|.

    The expected misalignment error probability sin^2(theta/2) grows as
    coeff*dt/4 for small elapsed time.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if coeff < 0.0:
        raise ValueError("drift coefficient must be non-negative")
    if coeff == 0.0:
        return current
    theta = abs(rng.normal(0.0, math.sqrt(coeff * dt)))
    step = PolarizationRotation.about_axis(random_axis(rng), theta)
    return step.compose(current)


def realign(current: PolarizationRotation) -> PolarizationRotation:
    """Manual polarization-controller compensation: reset to identity."""
    return PolarizationRotation.identity()


def apply_rotation(rot: PolarizationRotation,
                   state: JonesVector) -> JonesVector:
    out = rot.unitary @ state.as_array()
    return JonesVector(complex(out[0]), complex(out[1])).normalized()


def expected_drift_error(coeff: float, elapsed: float) -> float:
    """Mean misalignment error probability after diffusing for `elapsed` s.

    Depolarization form 0.5*(1 - exp(-coeff*t/2)): matches the coeff*t/4
    small-time growth of E[sin^2(theta/2)] and saturates at 1/2.
    """
    if coeff <= 0.0 or elapsed <= 0.0:
        return 0.0
    return 0.5 * (1.0 - math.exp(-0.5 * coeff * elapsed))


def mean_drift_error(coeff: float, t0: float, t1: float) -> float:
    """Time average of expected_drift_error over [t0, t1]."""
    if coeff <= 0.0 or t1 <= t0:
        return expected_drift_error(coeff, max(t0, t1))
    c = 0.5 * coeff
    integral = 0.5 * ((t1 - t0) - (math.exp(-c * t0) - math.exp(-c * t1)) / c)
    return integral / (t1 - t0)
