"""BB84 session orchestration and key accounting.

Composes source, link and receiver models into expected rates (analytic
mode) or into a full Monte Carlo photon-counting run, then reduces to
sifted-key rate, QBER with binomial uncertainty, asymptotic secure-key
rate and the AES-GCM classical capacity that rate can protect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import detection, link as link_mod, optics
from .detection import (BLOCK_SYMBOLS, FOUR_DETECTOR_PASSIVE,
                        TWO_DETECTOR_SWITCHED, ReceiverSpec,
                        dark_click_probability, simulate_detection)
from .link import LinkSpec, PolarizationRotation, total_budget
from .optics import SourceSpec

# One fresh 256-bit AES key per 64 GB of protected traffic (NIST key
# renewal limit) => each secret bit covers 64e9*8/256 = 2e9 classical bits.
AES_BITS_PER_SECRET_BIT = 64e9 * 8.0 / 256.0

QBER_SECURE_LIMIT = 0.11


def binary_entropy(x: float) -> float:
    """Shannon entropy h2(x) in bits, with h2(0) = h2(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("binary_entropy argument must be in [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def secret_fraction(qber: float) -> float:
    """Asymptotic secure fraction max(0, 1 - 2*h2(Q)).

    Vanishes at the ~11% QBER limit for secure-key extraction.
    """
    if not 0.0 <= qber <= 0.5:
        raise ValueError("qber must be in [0, 0.5]")
    return max(0.0, 1.0 - 2.0 * binary_entropy(qber))


def skr_from_rkr(rkr: float, qber: float) -> float:
    """Secure-key rate from a raw (sifted) key rate and its QBER."""
    if rkr < 0.0:
        raise ValueError("rkr must be non-negative")
    return rkr * secret_fraction(qber)


def aes_gcm_capacity(skr: float) -> float:
    """Classical capacity (bit/s) securable by AES-GCM key renewal."""
    if skr < 0.0:
        raise ValueError("skr must be non-negative")
    return skr * AES_BITS_PER_SECRET_BIT


def min_skr_for_capacity(capacity: float) -> float:
    """Secure-key rate needed to keep a classical link under the
    AES-GCM renewal limit."""
    if capacity < 0.0:
        raise ValueError("capacity must be non-negative")
    return capacity / AES_BITS_PER_SECRET_BIT


def compose_errors(e1: float, e2: float) -> float:
    """Serial composition of two symmetric bit-error channels."""
    return 0.5 * (1.0 - (1.0 - 2.0 * e1) * (1.0 - 2.0 * e2))


def sift(alice_bits, alice_basis, bob_bits, bob_basis, valid):
    """Keep symbols where Bob registered a valid outcome in Alice's basis.

    Returns the kept (alice, bob) bit arrays.
    """
    arrays = [np.asarray(a) for a in
              (alice_bits, alice_basis, bob_bits, bob_basis, valid)]
    n = arrays[0].shape[0]
    if any(a.shape[0] != n for a in arrays):
        raise ValueError("sift streams must have equal length")
    a_bit, a_bas, b_bit, b_bas, ok = arrays
    keep = ok & (a_bas == b_bas)
    return a_bit[keep], b_bit[keep]


def qber_estimate(alice_bits, bob_bits) -> tuple[float, float]:
    """Observed QBER and its binomial standard error."""
    alice_bits = np.asarray(alice_bits)
    bob_bits = np.asarray(bob_bits)
    n = alice_bits.shape[0]
    if n == 0:
        raise ValueError("qber_estimate needs at least one sifted pair")
    q = float(np.count_nonzero(alice_bits != bob_bits)) / n
    return q, math.sqrt(q * (1.0 - q) / n)


@dataclass(frozen=True)
class ChannelFilter:
    """Passband defining the quantum channel at the transmitter output."""

    center_thz: float = 193.4
    width_thz: float = 0.2
    loss_db: float = 0.8


@dataclass(frozen=True)
class SessionConfig:
    symbol_rate_hz: float = 100e6
    duration_s: float = 1.0
    mode: str = "analytic"  # or "montecarlo"
    seed: int = 0
    source: SourceSpec = field(default_factory=SourceSpec)
    # "internal_sige" derives the launched photon number from the source
    # model; "external_laser" uses mu_external directly
    source_kind: str = "internal_sige"
    mu_external: float = 0.1
    channel_filter: ChannelFilter = field(default_factory=ChannelFilter)
    link: LinkSpec = field(default_factory=LinkSpec)
    receiver: ReceiverSpec = None  # type: ignore[assignment]
    intrinsic_error: float = 0.0
    realign_schedule: tuple[float, ...] | None = None
    # Monte Carlo runs simulate at most this many symbols and scale rates
    mc_symbols: int = 1_000_000
    # bin width for time-series output
    series_bin_s: float = 60.0

    def __post_init__(self):
        if self.duration_s <= 0.0:
            raise ValueError("duration_s must be positive")
        if not 0.0 <= self.intrinsic_error <= 0.5:
            raise ValueError("intrinsic_error must be in [0, 0.5]")
        if self.mode not in ("analytic", "montecarlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.source_kind not in ("internal_sige", "external_laser"):
            raise ValueError(f"unknown source_kind {self.source_kind!r}")
        if self.receiver is None:
            raise ValueError("receiver spec is required")

    def with_overrides(self, **kwargs) -> "SessionConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class TimeSample:
    t: float
    rkr: float
    qber: float
    skr: float
    realigned: bool = False


@dataclass(frozen=True)
class SessionResult:
    per_detector_counts: tuple[float, ...]
    sifted_bits: float
    qber: float
    qber_sigma: float
    rkr: float
    skr: float
    aes_capacity: float
    mu_tx: float = 0.0
    mu_rx: float = 0.0
    total_loss_db: float = 0.0
    time_series: tuple[TimeSample, ...] | None = None

    def to_record(self) -> dict:
        return {
            "sifted_bits": self.sifted_bits,
            "qber": self.qber,
            "qber_sigma": self.qber_sigma,
            "rkr": self.rkr,
            "skr": self.skr,
            "aes_capacity": self.aes_capacity,
            "mu_tx": self.mu_tx,
            "mu_rx": self.mu_rx,
            "total_loss_db": self.total_loss_db,
            **{f"counts_det{i}": c
               for i, c in enumerate(self.per_detector_counts)},
        }


def launched_photon_number(config: SessionConfig) -> float:
    """Mean photon number per symbol at the transmitter output."""
    if config.source_kind == "external_laser":
        return config.mu_external
    ch = config.channel_filter
    return optics.mean_photon_number(config.source, ch.center_thz,
                                     ch.width_thz, ch.loss_db)


def received_photon_number(config: SessionConfig) -> tuple[float, float]:
    """(mu at transmitter output, mu at receiver input)."""
    mu_tx = launched_photon_number(config)
    return mu_tx, link_mod.attenuate(mu_tx, total_budget(config.link))


@dataclass(frozen=True)
class AnalyticRates:
    per_detector_hz: tuple[float, ...]  # accepted clicks per detector
    rkr: float
    qber: float

    @property
    def error_rate(self) -> float:
        return self.rkr * self.qber


def analytic_rates(config: SessionConfig,
                   effective_error: float) -> AnalyticRates:
    """Expected detector, sifted-key and error rates for ideal-state BB84.

    Per symbol and detector, the matched-basis signal click probabilities
    are q(1-e) (correct outcome) and q(e) (wrong outcome) with
    q(x) = 1 - exp(-kappa*x); mismatched-basis clicks q(0.5) are sifted
    away.  Uniform-in-time events (darks, background) are kept with the
    gate fraction and carry error probability one half.  Per-detector
    dead-time thinning scales every sub-rate on that detector; symbols
    where two detectors fire are not discarded here (their probability is
    second order in the click probabilities and ignored analytically).
    """
    rx = config.receiver
    rate = config.symbol_rate_hz
    period = 1.0 / rate
    _, mu_rx = received_photon_number(config)
    etas = np.array([d.efficiency for d in rx.detectors])
    kappa = mu_rx * rx.transmission * rx.basis_factor * etas
    e = effective_error

    def q(x):
        return 1.0 - np.exp(-kappa * x)

    q_hi, q_lo, q_half = q(1.0 - e), q(e), q(0.5)
    p_dark = dark_click_probability(rx, config.link.background_rate_hz,
                                    period)
    sig_gate = rx.gate_fraction if rx.signal_gate_penalty else 1.0

    if rx.basis_scheme == TWO_DETECTOR_SWITCHED:
        p_click_sig = 0.25 * (q_hi + q_lo) + 0.5 * q_half
    else:
        p_click_sig = 0.25 * (q_hi + q_lo + 2.0 * q_half)
    p_click = 1.0 - (1.0 - p_click_sig) * (1.0 - p_dark)
    true_rates = rate * p_click
    dead = np.array([d.dead_time_s for d in rx.detectors])
    thin = 1.0 / (1.0 + true_rates * dead)

    kept_sig = 0.25 * (q_hi + q_lo) * sig_gate
    kept_err_sig = 0.25 * q_lo * sig_gate
    kept_dark = 0.5 * rx.gate_fraction * p_dark
    rkr = float(np.sum(thin * rate * (kept_sig + kept_dark)))
    err = float(np.sum(thin * rate * (kept_err_sig + 0.5 * kept_dark)))
    qber = err / rkr if rkr > 0.0 else 0.0
    per_det = tuple(float(x) for x in thin * true_rates)
    return AnalyticRates(per_detector_hz=per_det, rkr=rkr, qber=qber)


def _result_from_rates(config: SessionConfig, rates: AnalyticRates,
                       duration: float,
                       series: tuple[TimeSample, ...] | None = None
                       ) -> SessionResult:
    mu_tx, mu_rx = received_photon_number(config)
    sifted = rates.rkr * duration
    sigma = (math.sqrt(rates.qber * (1.0 - rates.qber) / sifted)
             if sifted > 0 else 0.0)
    skr = skr_from_rkr(rates.rkr, min(0.5, rates.qber))
    return SessionResult(
        per_detector_counts=tuple(r * duration
                                  for r in rates.per_detector_hz),
        sifted_bits=sifted, qber=rates.qber, qber_sigma=sigma,
        rkr=rates.rkr, skr=skr, aes_capacity=aes_gcm_capacity(skr),
        mu_tx=mu_tx, mu_rx=mu_rx,
        total_loss_db=total_budget(config.link), time_series=series)


def _segments(duration: float,
              schedule: tuple[float, ...] | None) -> list[tuple[float, float]]:
    """Split [0, duration] at each realign time."""
    cuts = sorted(t for t in (schedule or ()) if 0.0 < t < duration)
    edges = [0.0] + cuts + [duration]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def _analytic_session(config: SessionConfig) -> SessionResult:
    coeff = config.link.drift_coefficient
    segs = _segments(config.duration_s, config.realign_schedule)
    # duration-weighted mean drift error, reset at each realign
    total_err = 0.0
    total_rkr = 0.0
    counts = None
    for t0, t1 in segs:
        e_drift = link_mod.mean_drift_error(coeff, 0.0, t1 - t0)
        e_eff = compose_errors(config.intrinsic_error, e_drift)
        rates = analytic_rates(config, e_eff)
        w = (t1 - t0) / config.duration_s
        total_err += w * rates.error_rate
        total_rkr += w * rates.rkr
        seg_counts = np.array(rates.per_detector_hz) * w
        counts = seg_counts if counts is None else counts + seg_counts
    qber = total_err / total_rkr if total_rkr > 0.0 else 0.0
    merged = AnalyticRates(per_detector_hz=tuple(counts), rkr=total_rkr,
                           qber=qber)
    series = None
    if config.realign_schedule is not None:
        series = analytic_time_series(config)
    return _result_from_rates(config, merged, config.duration_s, series)


def analytic_time_series(config: SessionConfig) -> tuple[TimeSample, ...]:
    """Expected (t, rkr, qber, skr) samples over the session duration."""
    coeff = config.link.drift_coefficient
    segs = _segments(config.duration_s, config.realign_schedule)
    samples = []
    for seg_idx, (t0, t1) in enumerate(segs):
        t = t0
        first = True
        while t < t1 - 1e-9:
            t_next = min(t + config.series_bin_s, t1)
            e_drift = link_mod.mean_drift_error(coeff, t - t0, t_next - t0)
            e_eff = compose_errors(config.intrinsic_error, e_drift)
            rates = analytic_rates(config, e_eff)
            samples.append(TimeSample(
                t=0.5 * (t + t_next), rkr=rates.rkr, qber=rates.qber,
                skr=skr_from_rkr(rates.rkr, min(0.5, rates.qber)),
                realigned=(first and seg_idx > 0)))
            t = t_next
            first = False
    return tuple(samples)


def generate_alice_choices(n: int, seed: int,
                           stream: int = 0) -> np.ndarray:
    """Per-symbol BB84 state indices (H, V, R, L), block-deterministic."""
    out = np.empty(n, dtype=np.int64)
    for block in range(0, n, BLOCK_SYMBOLS):
        hi = min(block + BLOCK_SYMBOLS, n)
        rng = detection._block_rng(seed, stream, block // BLOCK_SYMBOLS)
        out[block:hi] = rng.integers(0, 4, size=hi - block)
    return out


@dataclass
class McCounts:
    sifted: int
    errors: int
    per_detector: np.ndarray
    n_symbols: int


def mc_counts(config: SessionConfig, n_symbols: int,
              rot: PolarizationRotation, seed: int) -> McCounts:
    """One Monte Carlo stretch: generate, transmit, detect, sift, count."""
    rx = config.receiver
    _, mu_rx = received_photon_number(config)
    states = generate_alice_choices(n_symbols, seed, stream=0)
    run = simulate_detection(
        states, mu_rx, rot, rx, config.symbol_rate_hz, seed,
        intrinsic_error=config.intrinsic_error,
        background_rate_hz=config.link.background_rate_hz, stream=1)
    ev = run.events
    gated = ev.gate_flag
    sym = ev.symbol_index[gated]
    det = ev.detector_id[gated].astype(np.int64)

    # discard symbols with two or more gated accepted clicks (double click)
    uniq, first_idx, counts = np.unique(sym, return_index=True,
                                        return_counts=True)
    single = counts == 1
    sym_k = uniq[single]
    det_k = det[first_idx[single]]

    if rx.basis_scheme == TWO_DETECTOR_SWITCHED:
        bob_basis = run.bob_basis[sym_k].astype(np.int64)
        bob_bit = det_k
    else:
        bob_basis = det_k >> 1
        bob_bit = det_k & 1
    alice = states[sym_k]
    a_bit, b_bit = sift(alice & 1, alice >> 1, bob_bit, bob_basis,
                        np.ones(len(sym_k), dtype=bool))
    return McCounts(sifted=int(a_bit.shape[0]),
                    errors=int(np.count_nonzero(a_bit != b_bit)),
                    per_detector=run.per_detector_counts,
                    n_symbols=n_symbols)


def _mc_session(config: SessionConfig) -> SessionResult:
    total_symbols = int(round(config.duration_s * config.symbol_rate_hz))
    n = min(total_symbols, config.mc_symbols)
    rot = PolarizationRotation.identity()
    coeff = config.link.drift_coefficient
    if coeff > 0.0:
        # drift accumulated over the simulated stretch midpoint
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=config.seed, spawn_key=(9, 0)))
        elapsed = 0.5 * n / config.symbol_rate_hz
        if elapsed > 0.0:
            rot = link_mod.drift_step(rot, elapsed, coeff, rng)
    counts = mc_counts(config, n, rot, config.seed)
    sim_duration = n / config.symbol_rate_hz
    rkr = counts.sifted / sim_duration
    if counts.sifted > 0:
        qber = counts.errors / counts.sifted
        sigma = math.sqrt(qber * (1.0 - qber) / counts.sifted)
    else:
        qber, sigma = 0.0, 0.0
    skr = skr_from_rkr(rkr, min(0.5, qber))
    mu_tx, mu_rx = received_photon_number(config)
    scale = config.duration_s / sim_duration
    series = None
    if config.realign_schedule is not None:
        series = mc_time_series(config)
    return SessionResult(
        per_detector_counts=tuple(float(c) * scale
                                  for c in counts.per_detector),
        sifted_bits=counts.sifted * scale, qber=qber, qber_sigma=sigma,
        rkr=rkr, skr=skr, aes_capacity=aes_gcm_capacity(skr),
        mu_tx=mu_tx, mu_rx=mu_rx,
        total_loss_db=total_budget(config.link), time_series=series)


def mc_time_series(config: SessionConfig) -> tuple[TimeSample, ...]:
    """Binned Monte Carlo time series with drift and realign events.

    Each bin simulates up to mc_symbols contiguous symbols under the
    rotation accumulated since the last realign, then scales to rates.
    """
    coeff = config.link.drift_coefficient
    segs = _segments(config.duration_s, config.realign_schedule)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(9, 1)))
    samples = []
    bin_idx = 0
    for seg_idx, (t0, t1) in enumerate(segs):
        rot = PolarizationRotation.identity()
        t = t0
        first = True
        while t < t1 - 1e-9:
            t_next = min(t + config.series_bin_s, t1)
            if coeff > 0.0:
                rot = link_mod.drift_step(rot, t_next - t, coeff, rng)
            n = min(int(round((t_next - t) * config.symbol_rate_hz)),
                    config.mc_symbols)
            counts = mc_counts(config, n, rot,
                               config.seed + 1000003 * (bin_idx + 1))
            sim_duration = n / config.symbol_rate_hz
            rkr = counts.sifted / sim_duration
            qber = (counts.errors / counts.sifted
                    if counts.sifted > 0 else 0.0)
            samples.append(TimeSample(
                t=0.5 * (t + t_next), rkr=rkr, qber=qber,
                skr=skr_from_rkr(rkr, min(0.5, qber)),
                realigned=(first and seg_idx > 0)))
            t = t_next
            first = False
            bin_idx += 1
    return tuple(samples)


def run_session(config: SessionConfig) -> SessionResult:
    """Run one BB84 session in the configured mode."""
    if config.mode == "analytic":
        return _analytic_session(config)
    return _mc_session(config)
