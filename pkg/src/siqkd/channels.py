"""ITU-T DWDM grid channel planning on a fixed frequency anchor."""

from __future__ import annotations

from dataclasses import dataclass

from .optics import C_NM_THZ

ANCHOR_CHANNEL = 34
ANCHOR_FREQ_THZ = 193.4  # ITU-T channel 34, 1550.12 nm
GRID_BASE_THZ = 190.0  # channel number n sits at 190.0 + 0.1*n THz


@dataclass(frozen=True)
class ChannelPlan:
    """Channels of a fixed-spacing grid covering a wavelength span.

    The span endpoints are snapped to the nearest grid points, so quoting
    the (rounded) wavelengths of the outermost channels reproduces the
    same plan.
    """

    grid_spacing_ghz: float = 200.0
    start_nm: float = 1520.25
    stop_nm: float = 1576.20

    def __post_init__(self):
        if self.grid_spacing_ghz <= 0.0:
            raise ValueError("grid_spacing_ghz must be positive")
        if self.start_nm >= self.stop_nm:
            raise ValueError("start_nm must be below stop_nm")

    @property
    def spacing_thz(self) -> float:
        return self.grid_spacing_ghz * 1e-3

    def frequencies_thz(self) -> list[float]:
        """Grid frequencies from low to high, snapped to the anchor grid."""
        f_hi = C_NM_THZ / self.start_nm
        f_lo = C_NM_THZ / self.stop_nm
        k_lo = round((f_lo - ANCHOR_FREQ_THZ) / self.spacing_thz)
        k_hi = round((f_hi - ANCHOR_FREQ_THZ) / self.spacing_thz)
        return [ANCHOR_FREQ_THZ + k * self.spacing_thz
                for k in range(k_lo, k_hi + 1)]

    def channels(self) -> list[tuple[int, float, float]]:
        """(itu_channel_number, frequency_thz, wavelength_nm) rows."""
        rows = []
        for f in self.frequencies_thz():
            number = round((f - GRID_BASE_THZ) / 0.1)
            rows.append((number, f, C_NM_THZ / f))
        return rows

    def __len__(self) -> int:
        return len(self.frequencies_thz())
