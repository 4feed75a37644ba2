"""Command-line entry point.

Verbs: simulate, sweep-ob, sweep-reach, sweep-channel, longrun,
calibrate, fit.  All verbs accept --config/--seed/--mode/--out/--override
and exit nonzero with a JSON error record on stderr when something fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import experiments, optics, presets
from .experiments import FitError
from .protocol import run_session


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siqkd",
        description="BB84 transmitter/link simulator and analysis tool")
    sub = parser.add_subparsers(dest="verb", required=True)
    verbs = ("simulate", "sweep-ob", "sweep-reach", "sweep-channel",
             "longrun", "calibrate", "fit")
    for verb in verbs:
        p = sub.add_parser(verb)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="TOML configuration file")
        p.add_argument("--seed", type=int, default=None, metavar="U64")
        p.add_argument("--mode", choices=("analytic", "mc"), default=None)
        p.add_argument("--out", metavar="DIR", default=None,
                       help="directory for CSV/JSON outputs")
        p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="dotted config override, repeatable")
    return parser


def _load(args) -> dict:
    cfg = config_mod.load_config(args.config)
    cfg = config_mod.apply_overrides(cfg, args.override)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.mode is not None:
        cfg["mode"] = args.mode
    return cfg


def _emit(record: dict, out: str | None, filename: str) -> None:
    text = json.dumps(record, indent=2, sort_keys=True)
    print(text)
    if out:
        path = Path(out) / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")


def _write_table(table, out: str | None, filename: str) -> None:
    if out:
        experiments.write_csv(table, Path(out) / filename)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    session = config_mod.build_session(cfg)
    result = run_session(session)
    _emit(result.to_record(), args.out, "result.json")
    return 0


def cmd_sweep_ob(args) -> int:
    cfg = _load(args)
    cfg["scenario"] = "budget"
    sweep = config_mod.build_sweep(cfg, "sweep_ob", args.out)
    table = experiments.sweep_ob(sweep)
    _write_table(table, args.out, "ob_sweep.csv")
    _emit({"rows": len(table.rows), "qber_limit_crossing_db":
           table.crossing}, args.out, "ob_sweep.json")
    return 0


def cmd_sweep_reach(args) -> int:
    cfg = _load(args)
    cfg["scenario"] = "reach"
    sweep = config_mod.build_sweep(cfg, "sweep_reach", args.out)
    table = experiments.sweep_reach(sweep)
    _write_table(table, args.out, "reach_sweep.csv")
    _emit({"rows": len(table.rows), "qber_limit_crossing_km":
           table.crossing}, args.out, "reach_sweep.json")
    return 0


def cmd_sweep_channel(args) -> int:
    cfg = _load(args)
    cfg["scenario"] = "channel"
    base = config_mod.build_session(cfg)
    table = experiments.sweep_channel(base=base)
    _write_table(table, args.out, "channel_sweep.csv")
    secure, fast = experiments.channel_counts(table)
    total_capacity = sum(r["aes_capacity"] for r in table.rows)
    _emit({"channels": len(table.rows), "secure_channels": secure,
           "channels_above_1kbs": fast,
           "aggregate_aes_capacity_bps": total_capacity},
          args.out, "channel_sweep.json")
    return 0


def cmd_longrun(args) -> int:
    cfg = _load(args)
    sect = cfg.get("longrun", {})
    duration = float(sect.get("duration_s", 7200.0))
    every = float(sect.get("realign_every_s", 0.0))
    session = config_mod.build_session(cfg)
    schedule = tuple(np.arange(every, duration, every)) if every > 0 \
        else ()
    link = session.link
    if link.drift_coefficient == 0.0:
        link = replace(link,
                       drift_coefficient=presets.DRIFT_COEFF_RAD2_PER_S)
    session = replace(session, duration_s=duration, link=link,
                      realign_schedule=schedule,
                      series_bin_s=float(sect.get("bin_s", 60.0)))
    table = experiments.longrun(session)
    _write_table(table, args.out, "longrun.csv")
    qbers = table.column("qber")
    _emit({"bins": len(table.rows), "qber_first": qbers[0],
           "qber_last": qbers[-1],
           "mean_skr": float(np.mean(table.column("skr")))},
          args.out, "longrun.json")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    sect = cfg.get("calibrate", {})
    device = optics.SimulatedTransmitter(
        alpha_offset=float(sect.get("alpha_offset", 0.35)),
        noise_fraction=float(sect.get("noise_fraction", 0.0)),
        rng=np.random.default_rng(int(cfg.get("seed", 0))))
    phi = optics.calibrate_tops(
        device, tolerance=float(sect.get("tolerance", 1e-6)))
    _emit({"balanced_phase_rad": phi,
           "residual_imbalance": device.imbalance(phi, reads=16)},
          args.out, "calibration.json")
    return 0


def cmd_fit(args) -> int:
    cfg = _load(args)
    fitted = experiments.fit_parameters(
        fit_fwhm=bool(cfg.get("fit", {}).get("fwhm", True)))
    _emit({**fitted.as_dict(), "residuals": fitted.residuals},
          args.out, "fit.json")
    return 0


_HANDLERS = {
    "simulate": cmd_simulate,
    "sweep-ob": cmd_sweep_ob,
    "sweep-reach": cmd_sweep_reach,
    "sweep-channel": cmd_sweep_channel,
    "longrun": cmd_longrun,
    "calibrate": cmd_calibrate,
    "fit": cmd_fit,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _HANDLERS[args.verb](args)
    except (config_mod.ConfigError, FitError, optics.CalibrationError,
            ValueError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "verb": args.verb}
        print(json.dumps(record), file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - unexpected failure
        record = {"error": type(exc).__name__, "message": str(exc),
                  "verb": args.verb,
                  "traceback": traceback.format_exc()}
        print(json.dumps(record), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
