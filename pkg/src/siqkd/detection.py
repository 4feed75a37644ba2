"""Receiver model: polarization analyzer, single-photon detectors, dead time.

Provides analytic per-symbol click probabilities and a block-deterministic
Monte Carlo event generator.  Random numbers are drawn in fixed-size symbol
blocks keyed by (seed, stream, block index), so results are bit-identical
no matter how the symbol range is partitioned across workers; the
sequential dead-time pass runs over the globally ordered event list in the
compiled kernel (pure Python fallback available).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._kernel import deadtime_filter
from .link import PolarizationRotation, apply_rotation
from .optics import BB84_STATES, JonesVector

BLOCK_SYMBOLS = 1 << 16

# state index order everywhere: H, V, R, L; basis = idx >> 1, bit = idx & 1
STATE_ORDER = ("H", "V", "R", "L")
BASIS_HV, BASIS_RL = 0, 1

TWO_DETECTOR_SWITCHED = "two_detector_switched"
FOUR_DETECTOR_PASSIVE = "four_detector_passive"


@dataclass(frozen=True)
class DetectorSpec:
    efficiency: float
    dark_rate_hz: float
    dead_time_s: float
    label: str = ""

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must be in [0, 1]")
        if self.dark_rate_hz < 0.0:
            raise ValueError("dark_rate_hz must be non-negative")
        if self.dead_time_s < 0.0:
            raise ValueError("dead_time_s must be non-negative")


@dataclass(frozen=True)
class ReceiverSpec:
    detectors: tuple[DetectorSpec, ...]
    basis_scheme: str = TWO_DETECTOR_SWITCHED
    insertion_loss_db: float = 0.0
    gate_fraction: float = 0.5
    basis_choice_probability: float = 0.5
    # when True the temporal gate also rejects signal photons; by default
    # signal pulses are taken to sit inside the gate and only uniform-in-
    # time events (darks, background) pay the gate penalty
    signal_gate_penalty: bool = False

    def __post_init__(self):
        need = 2 if self.basis_scheme == TWO_DETECTOR_SWITCHED else 4
        if self.basis_scheme not in (TWO_DETECTOR_SWITCHED,
                                     FOUR_DETECTOR_PASSIVE):
            raise ValueError(f"unknown basis scheme {self.basis_scheme!r}")
        if len(self.detectors) != need:
            raise ValueError(
                f"{self.basis_scheme} requires exactly {need} detectors")
        if not 0.0 < self.gate_fraction <= 1.0:
            raise ValueError("gate_fraction must be in (0, 1]")
        if not 0.0 <= self.basis_choice_probability <= 1.0:
            raise ValueError("basis_choice_probability must be in [0, 1]")

    @property
    def basis_factor(self) -> float:
        return 1.0 if self.basis_scheme == TWO_DETECTOR_SWITCHED else 0.5

    @property
    def transmission(self) -> float:
        return 10.0 ** (-self.insertion_loss_db / 10.0)

    def with_overrides(self, **kwargs) -> "ReceiverSpec":
        return replace(self, **kwargs)


_BASIS_VECTORS = {
    "HV": (BB84_STATES["H"], BB84_STATES["V"]),
    "RL": (BB84_STATES["R"], BB84_STATES["L"]),
}


def projection_probability(state: JonesVector, basis: str,
                           outcome: str) -> float:
    """Born-rule probability of one analyzer outcome for a given basis."""
    try:
        first, second = _BASIS_VECTORS[basis]
    except KeyError:
        raise ValueError(f"unknown basis {basis!r}") from None
    if outcome == "first":
        target = first
    elif outcome == "second":
        target = second
    else:
        raise ValueError(f"unknown outcome {outcome!r}")
    return target.fidelity(state)


def click_probability(mu_rx: float, det: DetectorSpec, rx: ReceiverSpec,
                      p_proj: float, symbol_period_s: float) -> float:
    """Per-symbol click probability combining signal and dark counts."""
    if mu_rx < 0.0 or not 0.0 <= p_proj <= 1.0 or symbol_period_s <= 0.0:
        raise ValueError("invalid click_probability input")
    p_sig = 1.0 - math.exp(-mu_rx * rx.transmission * det.efficiency
                           * p_proj * rx.basis_factor)
    p_dark = det.dark_rate_hz * symbol_period_s * rx.gate_fraction
    return 1.0 - (1.0 - p_sig) * (1.0 - min(1.0, p_dark))


def dead_time_throughput(true_rate_hz: float, dead_time_s: float) -> float:
    """Non-paralyzable accepted rate: r / (1 + r*tau)."""
    if true_rate_hz < 0.0:
        raise ValueError("true_rate_hz must be non-negative")
    return true_rate_hz / (1.0 + true_rate_hz * dead_time_s)


def mix_error(p: float, error: float) -> float:
    """Fold a symmetric misalignment error into a projection probability."""
    return (1.0 - 2.0 * error) * p + error


def projection_table(rot: PolarizationRotation,
                     intrinsic_error: float = 0.0) -> np.ndarray:
    """p[state, detector] for the four ideal symbols after a rotation.

    Detector axis order is H, V, R, L; callers slice it per scheme.
    """
    table = np.empty((4, 4))
    outcomes = [("HV", "first"), ("HV", "second"),
                ("RL", "first"), ("RL", "second")]
    for i, name in enumerate(STATE_ORDER):
        received = apply_rotation(rot, BB84_STATES[name])
        for j, (basis, outcome) in enumerate(outcomes):
            p = projection_probability(received, basis, outcome)
            table[i, j] = mix_error(p, intrinsic_error)
    return table


@dataclass
class DetectionEvents:
    """Columnar record of detection events (one row per accepted click)."""

    symbol_index: np.ndarray
    detector_id: np.ndarray
    position: np.ndarray  # fraction of the symbol period
    gate_flag: np.ndarray
    accepted: np.ndarray

    def times(self, symbol_period_s: float) -> np.ndarray:
        return (self.symbol_index + self.position) * symbol_period_s

    def to_records(self) -> np.ndarray:
        """Serializable (symbol_index, detector_id, gate_flag) rows."""
        rec = np.empty(len(self.symbol_index),
                       dtype=[("symbol_index", "i8"), ("detector_id", "i2"),
                              ("gate_flag", "?")])
        rec["symbol_index"] = self.symbol_index
        rec["detector_id"] = self.detector_id
        rec["gate_flag"] = self.gate_flag
        return rec

    def __len__(self) -> int:
        return len(self.symbol_index)


@dataclass
class DetectionRun:
    events: DetectionEvents  # accepted events only, ordered by time
    bob_basis: np.ndarray  # per symbol; in the passive scheme this is the
    # basis of the detector that fired (mismatch-resolved at counting)
    per_detector_counts: np.ndarray  # accepted clicks per detector
    n_symbols: int


def _block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(stream, block)))


def signal_click_table(mu_rx: float, rx: ReceiverSpec,
                       rot: PolarizationRotation,
                       intrinsic_error: float) -> np.ndarray:
    """Per-symbol signal click probabilities.

    Returns shape (4 states, 2 bob bases, n_detectors) for the switched
    scheme and (4 states, n_detectors) for the passive scheme.
    """
    proj = projection_table(rot, intrinsic_error)
    etas = np.array([d.efficiency for d in rx.detectors])
    kappa = mu_rx * rx.transmission * rx.basis_factor * etas
    if rx.basis_scheme == TWO_DETECTOR_SWITCHED:
        table = np.empty((4, 2, 2))
        for b in (BASIS_HV, BASIS_RL):
            # detector j measures outcome j of the active basis
            p = proj[:, 2 * b:2 * b + 2]
            table[:, b, :] = 1.0 - np.exp(-kappa[np.newaxis, :] * p)
        return table
    return 1.0 - np.exp(-kappa[np.newaxis, :] * proj)


def dark_click_probability(rx: ReceiverSpec, background_rate_hz: float,
                           symbol_period_s: float) -> np.ndarray:
    """Per-detector uniform-in-time click probability per symbol.

    In-band background photons are unpolarized, so each detector sees the
    background through the receiver transmission, its own efficiency, the
    basis split and a Born factor of one half.
    """
    darks = np.array([d.dark_rate_hz for d in rx.detectors])
    etas = np.array([d.efficiency for d in rx.detectors])
    bg = (background_rate_hz * rx.transmission * etas
          * 0.5 * rx.basis_factor)
    return (darks + bg) * symbol_period_s


def simulate_detection(states: np.ndarray, mu_rx: float,
                       rot: PolarizationRotation, rx: ReceiverSpec,
                       symbol_rate_hz: float, seed: int,
                       intrinsic_error: float = 0.0,
                       background_rate_hz: float = 0.0,
                       stream: int = 1) -> DetectionRun:
    """Monte Carlo detection of a stream of prepared symbols.

    `states` holds per-symbol indices into the H, V, R, L alphabet.
    Signal photons arrive at the symbol center (inside the gate unless
    signal_gate_penalty is set); dark and background events are uniform in
    the symbol.  Dead time blocks any later event on the same detector
    within dead_time_s of an accepted event.
    """
    states = np.asarray(states, dtype=np.int64)
    n = states.shape[0]
    n_det = len(rx.detectors)
    period = 1.0 / symbol_rate_hz
    sig_table = signal_click_table(mu_rx, rx, rot, intrinsic_error)
    p_dark = dark_click_probability(rx, background_rate_hz, period)
    switched = rx.basis_scheme == TWO_DETECTOR_SWITCHED
    half_gate = 0.5 * rx.gate_fraction

    bob_basis = np.empty(n, dtype=np.int8)
    sym_chunks, det_chunks, pos_chunks, gate_chunks = [], [], [], []

    for block in range(0, n, BLOCK_SYMBOLS):
        hi = min(block + BLOCK_SYMBOLS, n)
        m = hi - block
        rng = _block_rng(seed, stream, block // BLOCK_SYMBOLS)
        s = states[block:hi]
        u_basis = rng.random(m)
        u_sig = rng.random((m, n_det))
        u_dark = rng.random((m, n_det))
        u_pos = rng.random((m, n_det))
        u_spos = rng.random((m, n_det))

        if switched:
            b = (u_basis >= rx.basis_choice_probability).astype(np.int8)
            p_sig = sig_table[s, b, :]
        else:
            b = np.zeros(m, dtype=np.int8)  # resolved per event below
            p_sig = sig_table[s, :]
        bob_basis[block:hi] = b

        sig_hit = u_sig < p_sig
        dark_hit = u_dark < p_dark[np.newaxis, :]
        any_hit = sig_hit | dark_hit

        rows, cols = np.nonzero(any_hit)
        if rows.size == 0:
            continue
        s_hit = sig_hit[rows, cols]
        d_hit = dark_hit[rows, cols]
        dark_pos = u_pos[rows, cols]
        # signal photons sit at the symbol center unless the symbol is
        # CW-like (signal_gate_penalty), in which case they are uniform
        # and the offline gate rejects a matching share of them
        sig_pos = (u_spos[rows, cols] if rx.signal_gate_penalty
                   else np.full(rows.size, 0.5))
        # detector fires on the first arrival within the symbol
        pos = np.where(s_hit & (~d_hit | (dark_pos >= sig_pos)),
                       sig_pos, dark_pos)
        in_gate = np.abs(pos - 0.5) <= half_gate

        sym_chunks.append(rows.astype(np.int64) + block)
        det_chunks.append(cols.astype(np.int64))
        pos_chunks.append(pos)
        gate_chunks.append(in_gate)

    if sym_chunks:
        sym = np.concatenate(sym_chunks)
        det = np.concatenate(det_chunks)
        pos = np.concatenate(pos_chunks)
        gate = np.concatenate(gate_chunks)
    else:
        sym = np.empty(0, dtype=np.int64)
        det = np.empty(0, dtype=np.int64)
        pos = np.empty(0)
        gate = np.empty(0, dtype=bool)

    order = np.lexsort((det, pos, sym))
    sym, det, pos, gate = sym[order], det[order], pos[order], gate[order]
    times = (sym + pos) * period
    dead = np.array([d.dead_time_s for d in rx.detectors])
    ok = deadtime_filter(times, det, dead, n_det)

    events = DetectionEvents(
        symbol_index=sym[ok], detector_id=det[ok].astype(np.int16),
        position=pos[ok], gate_flag=gate[ok],
        accepted=np.ones(int(ok.sum()), dtype=bool))
    counts = np.bincount(det[ok], minlength=n_det)
    return DetectionRun(events=events, bob_basis=bob_basis,
                        per_detector_counts=counts, n_symbols=n)
