"""Tests for configuration loading, merging and overrides."""

import pytest

from siqkd.config import (ConfigError, apply_overrides, build_session,
                          build_sweep, load_config, parse_override)


class TestLoading:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg["scenario"] == "budget"
        assert cfg["mode"] == "analytic"
        assert cfg["sweep"]["step"] == 1.0

    def test_defaults_are_copied(self):
        a = load_config(None)
        a["sweep"]["step"] = 99.0
        b = load_config(None)
        assert b["sweep"]["step"] == 1.0

    def test_file_merge(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text('scenario = "field"\n[sweep]\nstop = 30.0\n')
        cfg = load_config(path)
        assert cfg["scenario"] == "field"
        assert cfg["sweep"]["stop"] == 30.0
        assert cfg["sweep"]["step"] == 1.0  # default preserved

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/no/such/file.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("scenario = [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_packaged_default_file_matches_defaults(self):
        from importlib import resources
        with resources.path("siqkd.data", "default.toml") as p:
            cfg = load_config(p)
        assert cfg == load_config(None)


class TestOverrides:
    def test_parse_types(self):
        assert parse_override("seed=42") == (["seed"], 42)
        assert parse_override("sweep.step=0.5") == (["sweep", "step"], 0.5)
        assert parse_override("field.drift=true") == (["field", "drift"],
                                                      True)
        assert parse_override('mode="mc"') == (["mode"], "mc")
        assert parse_override("mode=mc") == (["mode"], "mc")

    def test_parse_errors(self):
        with pytest.raises(ConfigError):
            parse_override("no_equals")
        with pytest.raises(ConfigError):
            parse_override("=5")

    def test_apply_nested(self):
        cfg = apply_overrides(load_config(None),
                              ["sweep.stop=30", "scenario=reach",
                               "reach.length_km=25.5"])
        assert cfg["sweep"]["stop"] == 30
        assert cfg["reach"]["length_km"] == 25.5

    def test_apply_does_not_mutate_input(self):
        base = load_config(None)
        apply_overrides(base, ["seed=7"])
        assert base["seed"] == 0


class TestBuildSession:
    def test_scenarios(self):
        for scenario, loss in (("budget", 0.0), ("reach", 2.77),
                               ("field", 16.5)):
            cfg = apply_overrides(load_config(None),
                                  [f"scenario={scenario}"])
            session = build_session(cfg)
            total = sum(e.loss_db for e in session.link.elements)
            assert total == pytest.approx(loss, abs=1e-9)

    def test_mode_mapping(self):
        cfg = apply_overrides(load_config(None), ["mode=mc"])
        assert build_session(cfg).mode == "montecarlo"
        cfg["mode"] = "heuristic"
        with pytest.raises(ConfigError):
            build_session(cfg)

    def test_unknown_scenario(self):
        cfg = apply_overrides(load_config(None), ["scenario=moonbounce"])
        with pytest.raises(ConfigError):
            build_session(cfg)

    def test_top_level_session_overrides(self):
        cfg = apply_overrides(load_config(None),
                              ["intrinsic_error=0.01", "seed=12",
                               "duration_s=2.5"])
        session = build_session(cfg)
        assert session.intrinsic_error == 0.01
        assert session.seed == 12
        assert session.duration_s == 2.5

    def test_build_sweep(self):
        cfg = apply_overrides(load_config(None),
                              ["sweep.start=1", "sweep.stop=5",
                               "sweep.step=2"])
        sweep = build_sweep(cfg, "sweep_ob")
        assert sweep.sweep_values() == [1.0, 3.0, 5.0]
        assert sweep.base is not None
