"""TOML configuration loading, defaults and dotted-key overrides."""

from __future__ import annotations

import ast
import copy
from dataclasses import replace
from pathlib import Path

import tomli

from . import presets
from .experiments import ScenarioConfig
from .protocol import SessionConfig

DEFAULTS: dict = {
    "scenario": "budget",  # budget | reach | channel | field
    "mode": "analytic",  # analytic | mc
    "seed": 0,
    "duration_s": 1.0,
    "mc_symbols": 1_000_000,
    "budget": {"voa_db": 0.0, "source_kind": "internal_sige"},
    "reach": {"length_km": 10.0},
    "channel": {"center_thz": 193.4},
    "field": {"endpoint_bpf": True, "drift": False},
    "sweep": {"start": 0.0, "stop": 22.0, "step": 1.0},
    "longrun": {"duration_s": 7200.0, "realign_every_s": 0.0,
                "bin_s": 60.0},
    "calibrate": {"alpha_offset": 0.35, "noise_fraction": 0.0,
                  "tolerance": 1e-6},
}


class ConfigError(ValueError):
    """Raised for malformed configuration input."""


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | Path | None = None) -> dict:
    """Defaults merged with the TOML file at path, if given."""
    if path is None:
        return copy.deepcopy(DEFAULTS)
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            loaded = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return _merge(DEFAULTS, loaded)


def parse_override(text: str) -> tuple[list[str], object]:
    """Split 'a.b.c=value' into a key path and a parsed value.

    Values parse as Python literals (numbers, booleans, quoted strings,
    lists); anything that doesn't parse stays a string.
    """
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key=value")
    key, _, raw = text.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"override {text!r} has an empty key")
    raw = raw.strip()
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        lowered = raw.lower()
        if lowered in ("true", "false"):
            value = lowered == "true"
        else:
            value = raw
    return key.split("."), value


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    out = copy.deepcopy(config)
    for text in overrides:
        path, value = parse_override(text)
        node = out
        for part in path[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[path[-1]] = value
    return out


def _mode_name(mode: str) -> str:
    if mode in ("analytic",):
        return "analytic"
    if mode in ("mc", "montecarlo"):
        return "montecarlo"
    raise ConfigError(f"unknown mode {mode!r}")


def build_session(config: dict) -> SessionConfig:
    """Assemble a SessionConfig from a merged configuration dict."""
    scenario = config.get("scenario", "budget")
    common = dict(mode=_mode_name(config.get("mode", "analytic")),
                  seed=int(config.get("seed", 0)),
                  duration_s=float(config.get("duration_s", 1.0)),
                  mc_symbols=int(config.get("mc_symbols", 1_000_000)))
    if scenario == "budget":
        sect = config.get("budget", {})
        session = presets.budget_config(
            voa_db=float(sect.get("voa_db", 0.0)),
            source_kind=sect.get("source_kind", "internal_sige"),
            **common)
    elif scenario == "reach":
        sect = config.get("reach", {})
        session = presets.reach_config(
            float(sect.get("length_km", 10.0)), **common)
    elif scenario == "channel":
        sect = config.get("channel", {})
        session = presets.channel_config(
            float(sect.get("center_thz", 193.4)), **common)
    elif scenario == "field":
        sect = config.get("field", {})
        session = presets.field_config(
            endpoint_bpf=bool(sect.get("endpoint_bpf", True)),
            drift=bool(sect.get("drift", False)), **common)
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    for key in ("intrinsic_error", "mu_external", "series_bin_s"):
        if key in config:
            session = replace(session, **{key: float(config[key])})
    return session


def build_sweep(config: dict, scenario: str,
                output_dir: str | None = None) -> ScenarioConfig:
    sweep = config.get("sweep", {})
    return ScenarioConfig(
        scenario=scenario,
        sweep_start=float(sweep.get("start", 0.0)),
        sweep_stop=float(sweep.get("stop", 22.0)),
        sweep_step=float(sweep.get("step", 1.0)),
        base=build_session(config),
        output_dir=output_dir)
