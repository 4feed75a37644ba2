"""Scenario sweeps, parameter fitting and table emission.

Each sweep reruns the session engine over one axis (attenuation, fiber
length, wavelength channel, time) and emits a CSV table plus anchor
verdict lines for the summary report.  fit_parameters solves the model's
free parameters against the measured anchors with bracketed 1-D root
finds, in a documented order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import presets
from .channels import ChannelPlan
from .optics import mean_photon_number
from .protocol import (QBER_SECURE_LIMIT, SessionConfig, SessionResult,
                       aes_gcm_capacity, run_session)


class FitError(RuntimeError):
    """Raised when a calibration target cannot be met."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One runnable experiment: a scenario name, its sweep axis and base
    session configuration."""

    scenario: str  # sweep_ob | sweep_reach | sweep_channel | longrun |
    # calibrate | single
    sweep_start: float = 0.0
    sweep_stop: float = 0.0
    sweep_step: float = 1.0
    base: SessionConfig | None = None
    output_dir: str | None = None

    def __post_init__(self):
        if self.scenario in ("sweep_ob", "sweep_reach"):
            if self.sweep_stop < self.sweep_start:
                raise ValueError("empty sweep range")
            if self.sweep_step <= 0.0:
                raise ValueError("sweep_step must be positive")

    def sweep_values(self) -> list[float]:
        n = int(math.floor(
            (self.sweep_stop - self.sweep_start) / self.sweep_step + 1e-9))
        return [self.sweep_start + k * self.sweep_step for k in range(n + 1)]


def _row_from_result(res: SessionResult) -> dict:
    return {
        "rkr": res.rkr,
        "qber": res.qber,
        "skr": res.skr,
    }


def _crossing(xs: list[float], qbers: list[float],
              limit: float = QBER_SECURE_LIMIT) -> float | None:
    """Linearly interpolated sweep position where QBER reaches the limit."""
    for i in range(len(xs) - 1):
        q0, q1 = qbers[i], qbers[i + 1]
        if q0 <= limit <= q1 and q1 > q0:
            return xs[i] + (limit - q0) / (q1 - q0) * (xs[i + 1] - xs[i])
    return None


@dataclass
class SweepTable:
    columns: tuple[str, ...]
    rows: list[dict]
    crossing: float | None = None

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def sweep_ob(cfg: ScenarioConfig) -> SweepTable:
    """QKD performance versus emulated link loss (VOA setting)."""
    base = cfg.base
    rows = []
    for ob in cfg.sweep_values():
        config = replace(
            base, link=replace(
                base.link,
                elements=(presets.LossElement.voa(ob),)))
        res = run_session(config)
        rows.append({"ob_db": ob, **_row_from_result(res)})
    table = SweepTable(columns=("ob_db", "rkr", "qber", "skr"), rows=rows)
    table.crossing = _crossing(table.column("ob_db"), table.column("qber"))
    return table


def sweep_reach(cfg: ScenarioConfig,
                attenuation_db_per_km: float | None = None) -> SweepTable:
    """QKD performance versus fiber length."""
    base = cfg.base
    alpha = (attenuation_db_per_km if attenuation_db_per_km is not None
             else presets.LAB_FIBER_DB_PER_KM)
    rows = []
    for km in cfg.sweep_values():
        config = replace(
            base, link=replace(
                base.link,
                elements=(presets.LossElement.fiber(km, alpha),)))
        res = run_session(config)
        rows.append({"km": km, "loss_db": km * alpha,
                     **_row_from_result(res)})
    table = SweepTable(columns=("km", "loss_db", "rkr", "qber", "skr"),
                       rows=rows)
    table.crossing = _crossing(table.column("km"), table.column("qber"))
    return table


def sweep_channel(base: SessionConfig | None = None,
                  plan: ChannelPlan | None = None) -> SweepTable:
    """QKD performance across the WDM grid through the tunable filter.

    The secure-rate column skr is the sifted total of the switched
    two-detector receiver; skr_per_basis halves it, and
    skr_four_detector extrapolates the per-basis performance to a
    receiver with both bases always active (2x per-basis), which is the
    estimate used for the >1 kb/s channel count.
    """
    plan = plan or presets.default_channel_plan()
    rows = []
    for number, freq, wavelength in plan.channels():
        config = presets.channel_config(freq)
        if base is not None:
            config = replace(config,
                             channel_filter=presets.tunable_filter(freq),
                             mode=base.mode, seed=base.seed,
                             duration_s=base.duration_s)
        res = run_session(config)
        rows.append({
            "channel": number,
            "wavelength_nm": wavelength,
            "mu": res.mu_tx,
            "rkr": res.rkr,
            "rkr_per_basis": 0.5 * res.rkr,
            "qber": res.qber,
            "skr": res.skr,
            "skr_per_basis": 0.5 * res.skr,
            "skr_four_detector": res.skr,
            "aes_capacity": aes_gcm_capacity(res.skr),
        })
    return SweepTable(
        columns=("channel", "wavelength_nm", "mu", "rkr", "rkr_per_basis",
                 "qber", "skr", "skr_per_basis", "skr_four_detector",
                 "aes_capacity"),
        rows=rows)


def channel_counts(table: SweepTable) -> tuple[int, int]:
    """(secure channels, channels with four-detector SKR > 1 kb/s)."""
    secure = sum(1 for r in table.rows if r["skr"] > 0.0)
    fast = sum(1 for r in table.rows if r["skr_four_detector"] > 1e3)
    return secure, fast


def longrun(base: SessionConfig) -> SweepTable:
    """Time series of a long session with drift and optional realigns."""
    res = run_session(base if base.realign_schedule is not None
                      else replace(base, realign_schedule=()))
    rows = [{"t": s.t, "rkr": s.rkr, "qber": s.qber, "skr": s.skr,
             "realigned": int(s.realigned)} for s in res.time_series]
    return SweepTable(columns=("t", "rkr", "qber", "skr", "realigned"),
                      rows=rows)


# ---------------------------------------------------------------------------
# parameter fitting
# ---------------------------------------------------------------------------

@dataclass
class FittedParameters:
    fwhm_thz: float
    coupling_asymmetry_db: float
    lab_insertion_db: float
    lab_intrinsic_error: float
    lab_background_hz: float
    field_insertion_db: float
    field_intrinsic_error: float
    saturation_intrinsic_error: float
    residuals: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)
               if f.name != "residuals"}
        return out


def _fit_coupling(fwhm_thz: float) -> float:
    """Solve the forward-coupling offset so the channel-34 launch hits the
    photon-number anchor."""
    ch = presets.wdm_filter()

    def residual(c):
        src = presets.default_source(fwhm_thz=fwhm_thz,
                                     coupling_asymmetry_db=c)
        return mean_photon_number(src, ch.center_thz, ch.width_thz,
                                  ch.loss_db) - presets.MU_ANCHOR

    try:
        return brentq(residual, -30.0, 30.0, xtol=1e-10)
    except ValueError as exc:
        raise FitError("photon-number target not bracketed by "
                       "coupling_asymmetry_db in [-30, 30]") from exc


def _external_result(voa_db, insertion_db, intrinsic, background):
    config = presets.budget_config(voa_db=voa_db,
                                   source_kind="external_laser")
    config = replace(
        config,
        receiver=presets.lab_receiver(insertion_loss_db=insertion_db),
        intrinsic_error=intrinsic,
        link=replace(config.link, background_rate_hz=background))
    return run_session(config)


def _external_crossing(insertion_db, intrinsic, background) -> float:
    def resid(loss):
        return (_external_result(loss, insertion_db, intrinsic,
                                 background).qber - QBER_SECURE_LIMIT)
    if resid(0.0) >= 0.0:  # over the limit before any added loss
        return 0.0
    try:
        return brentq(resid, 0.0, 40.0, xtol=1e-6)
    except ValueError as exc:
        raise FitError("QBER limit never crossed within 0-40 dB") from exc


def _fit_lab_receiver(background_target_db: float | None
                      ) -> tuple[float, float, float]:
    """Jointly solve receiver insertion loss (sifted-rate anchor),
    intrinsic error (QBER anchor) and stray background (budget-crossing
    anchor) for the lab setup; the three couple only weakly, so a few
    rounds of 1-D solves converge."""
    insertion, intrinsic, background = 10.0, 0.05, 0.0
    for _ in range(6):
        def rkr_resid(il):
            return (_external_result(0.0, il, intrinsic, background).rkr
                    - presets.RKR_0DB_EXTERNAL)
        try:
            insertion = brentq(rkr_resid, 0.0, 20.0, xtol=1e-8)
        except ValueError as exc:
            raise FitError("sifted-rate anchor not reachable with "
                           "insertion loss in [0, 20] dB") from exc

        def qber_resid(e):
            return (_external_result(0.0, insertion, e, background).qber
                    - presets.QBER_0DB_EXTERNAL)
        try:
            intrinsic = brentq(qber_resid, 0.0, 0.3, xtol=1e-10)
        except ValueError as exc:
            raise FitError("QBER anchor not reachable") from exc

        if background_target_db is not None:
            def crossing_resid(bg):
                return (_external_crossing(insertion, intrinsic, bg)
                        - background_target_db)
            try:
                background = brentq(crossing_resid, 0.0, 1e7, xtol=1e-2)
            except ValueError as exc:
                raise FitError("budget-crossing anchor not reachable with "
                               "a non-negative stray background") from exc
    return insertion, intrinsic, background


def _channel_counts_for_fwhm(fwhm, coupling, insertion, intrinsic
                             ) -> tuple[int, int]:
    plan = presets.default_channel_plan()
    secure = fast = 0
    for _, freq, _ in plan.channels():
        config = presets.channel_config(freq)
        config = replace(
            config,
            source=presets.default_source(fwhm_thz=fwhm,
                                          coupling_asymmetry_db=coupling),
            receiver=presets.lab_receiver(insertion_loss_db=insertion),
            intrinsic_error=intrinsic)
        res = run_session(config)
        if res.skr > 0.0:
            secure += 1
        if res.skr > 1e3:  # four-detector estimate = total secure rate
            fast += 1
    return secure, fast


def _fit_fwhm(insertion, intrinsic) -> tuple[float, float]:
    """Scan the emission FWHM for the value whose channel sweep matches
    the secure-channel and >1 kb/s channel counts; returns (fwhm,
    coupling) with the launch re-anchored at each candidate."""
    candidates = []
    for fwhm in np.arange(3.0, 7.01, 0.05):
        coupling = _fit_coupling(fwhm)
        secure, fast = _channel_counts_for_fwhm(fwhm, coupling,
                                                insertion, intrinsic)
        d_secure = abs(secure - presets.CHANNEL_COUNT_SECURE)
        d_fast = abs(fast - presets.CHANNEL_COUNT_1KBS)
        candidates.append((d_secure + d_fast, d_secure, float(fwhm),
                           coupling, secure, fast))
    feasible = [c for c in candidates if c[1] <= 2
                and abs(c[5] - presets.CHANNEL_COUNT_1KBS) <= 2]
    if not feasible:
        score, _, fwhm, _, secure, fast = min(candidates)
        raise FitError(
            f"channel-count targets not met: best FWHM {fwhm:.2f} THz "
            f"gives {secure} secure / {fast} fast channels")
    _, _, fwhm, coupling, _, _ = min(feasible)
    return fwhm, coupling


def _field_result(insertion_db, intrinsic) -> SessionResult:
    config = presets.field_config()
    config = replace(
        config,
        receiver=presets.field_receiver(insertion_loss_db=insertion_db),
        intrinsic_error=intrinsic)
    return run_session(config)


def _fit_field() -> tuple[float, float]:
    insertion, intrinsic = 10.0, 0.03
    for _ in range(4):
        def rkr_resid(il):
            return _field_result(il, intrinsic).rkr - presets.FIELD_RKR
        try:
            insertion = brentq(rkr_resid, 0.0, 20.0, xtol=1e-8)
        except ValueError as exc:
            raise FitError("deployed-link sifted-rate anchor not "
                           "reachable") from exc

        def qber_resid(e):
            return _field_result(insertion, e).qber - presets.FIELD_QBER
        try:
            intrinsic = brentq(qber_resid, 0.0, 0.3, xtol=1e-10)
        except ValueError as exc:
            raise FitError("deployed-link QBER anchor not reachable") \
                from exc
    return insertion, intrinsic


def _fit_saturation_error(insertion, background) -> float:
    """Intrinsic error matching the saturation-limit QBER with the
    integrated source at zero added loss (informational)."""
    def resid(e):
        config = presets.budget_config(voa_db=0.0)
        config = replace(
            config,
            receiver=presets.lab_receiver(insertion_loss_db=insertion),
            intrinsic_error=e,
            link=replace(config.link, background_rate_hz=background))
        return run_session(config).qber - presets.QBER_SATURATION
    return brentq(resid, 0.0, 0.3, xtol=1e-10)


def fit_parameters(fit_fwhm: bool = True) -> FittedParameters:
    """Solve all free model parameters against the measured anchors.

    Order: forward-coupling offset from the photon-number anchor, then
    the lab receiver triple (insertion loss, intrinsic error, stray
    background) from the external-source anchors, then the emission FWHM
    from the channel counts (re-anchoring the launch), and finally the
    deployed-link receiver pair.
    """
    insertion, intrinsic, background = _fit_lab_receiver(
        presets.OB_CROSSING_EXTERNAL_DB)
    if fit_fwhm:
        fwhm, coupling = _fit_fwhm(insertion, intrinsic)
    else:
        fwhm = presets.FITTED_FWHM_THZ
        coupling = _fit_coupling(fwhm)
    field_insertion, field_intrinsic = _fit_field()
    saturation = _fit_saturation_error(insertion, background)

    ch = presets.wdm_filter()
    src = presets.default_source(fwhm_thz=fwhm,
                                 coupling_asymmetry_db=coupling)
    residuals = {
        "mu": mean_photon_number(src, ch.center_thz, ch.width_thz,
                                 ch.loss_db) / presets.MU_ANCHOR - 1.0,
        "rkr_0db": (_external_result(0.0, insertion, intrinsic,
                                     background).rkr
                    / presets.RKR_0DB_EXTERNAL - 1.0),
        "qber_0db": (_external_result(0.0, insertion, intrinsic,
                                      background).qber
                     / presets.QBER_0DB_EXTERNAL - 1.0),
        "crossing": (_external_crossing(insertion, intrinsic, background)
                     / presets.OB_CROSSING_EXTERNAL_DB - 1.0),
        "field_rkr": (_field_result(field_insertion,
                                    field_intrinsic).rkr
                      / presets.FIELD_RKR - 1.0),
        "field_qber": (_field_result(field_insertion,
                                     field_intrinsic).qber
                       / presets.FIELD_QBER - 1.0),
    }
    bad = {k: v for k, v in residuals.items() if abs(v) > 1e-3}
    if bad:
        raise FitError(f"fit residuals above 1e-3: {bad}")
    return FittedParameters(
        fwhm_thz=fwhm, coupling_asymmetry_db=coupling,
        lab_insertion_db=insertion, lab_intrinsic_error=intrinsic,
        lab_background_hz=background, field_insertion_db=field_insertion,
        field_intrinsic_error=field_intrinsic,
        saturation_intrinsic_error=saturation, residuals=residuals)


# ---------------------------------------------------------------------------
# table IO
# ---------------------------------------------------------------------------

def write_csv(table: SweepTable, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=table.columns)
        writer.writeheader()
        for row in table.rows:
            writer.writerow({k: repr(row[k]) if isinstance(row[k], float)
                             else row[k] for k in table.columns})


def read_csv(path: str | Path) -> SweepTable:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        columns = tuple(reader.fieldnames)
        rows = []
        for raw in reader:
            row = {}
            for k, v in raw.items():
                try:
                    num = float(v)
                    row[k] = int(num) if num.is_integer() and "." not in v \
                        and "e" not in v and "inf" not in v else num
                except ValueError:
                    row[k] = v
            rows.append(row)
    return SweepTable(columns=columns, rows=rows)


@dataclass(frozen=True)
class AnchorVerdict:
    name: str
    target: float
    actual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.actual - self.target) <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: target {self.target:g} "
                f"+/- {self.tolerance:g}, got {self.actual:g}")


def summary_report(verdicts: list[AnchorVerdict]) -> str:
    lines = [v.line() for v in verdicts]
    n_pass = sum(v.passed for v in verdicts)
    lines.append(f"{n_pass}/{len(verdicts)} anchors reproduced")
    return "\n".join(lines)
