"""Config parsing, environment defaults and NDJSON serialization."""

import json
import math

import numpy as np
import pytest

from wavelab.utils.config import ExperimentConfig, config_to_text, parse_config
from wavelab.utils.errors import ConfigurationError
from wavelab.utils.load_env import get_config
from wavelab.utils.serialization import dumps, write_json, write_ndjson


class TestParseConfig:
    def test_defaults(self):
        config = parse_config("")
        assert config.model.a == 0.25
        assert config.grid.n == 4001
        assert config.time.dt is None
        assert config.sections_set == []

    def test_model_only_file(self):
        config = parse_config("# constants only\nmodel.nu = 1.0\nmodel.b=2   # reaction\n\n")
        assert config.sections_set == ["model"]
        assert config.model.b == 2.0

    def test_out_of_range_names_key_and_line(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("model.nu=1\nmodel.a=1.5\n")
        assert exc.value.key == "model.a"
        assert exc.value.line == 2
        assert "line 2" in str(exc.value)

    def test_even_grid_rejected(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("grid.n=4000")
        assert exc.value.key == "grid.n"
        assert "odd" in str(exc.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("model.alpha=1")
        assert exc.value.key == "model.alpha"
        assert "unknown key" in str(exc.value)

    def test_unknown_section(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("solver.tol=1e-3")
        assert exc.value.line == 1

    @pytest.mark.parametrize("text", ["model.a 0.3", "a=0.3", "model.a="])
    def test_malformed_lines(self, text):
        with pytest.raises(ConfigurationError):
            parse_config(text)

    def test_duplicate_key(self):
        with pytest.raises(ConfigurationError) as exc:
            parse_config("mc.master_seed=1\nmc.master_seed=2")
        assert exc.value.line == 2
        assert "line 1" in str(exc.value)

    def test_none_value(self):
        config = parse_config("time.dt=none\ngrid.n=801")
        assert config.time.dt is None
        assert config.grid.n == 801

    def test_text_round_trip(self):
        config = parse_config("model.a=0.3\ntime.dt=0.1\ninit.family=shifted-wave\ninit.y0=0.25\nmc.workers=4")
        again = parse_config(config_to_text(config))
        assert again.model_dump() == config.model_dump()
        assert config_to_text(again) == config_to_text(config)

    def test_assignment_is_validated(self):
        config = ExperimentConfig()
        with pytest.raises(ValueError):
            config.mc.n_trials = 0


class TestEnvironment:
    def test_workers_from_env(self, monkeypatch):
        monkeypatch.setenv("WAVELAB_WORKERS", "3")
        assert get_config()["WAVELAB_WORKERS"] == 3

    def test_invalid_workers_fall_back(self, monkeypatch):
        monkeypatch.setenv("WAVELAB_WORKERS", "many")
        workers = get_config()["WAVELAB_WORKERS"]
        assert isinstance(workers, int) and 1 <= workers <= 8
        monkeypatch.setenv("WAVELAB_WORKERS", "0")
        assert get_config()["WAVELAB_WORKERS"] == 1

    def test_log_level_upper_cased(self, monkeypatch):
        monkeypatch.setenv("WAVELAB_LOG_LEVEL", "debug")
        monkeypatch.setenv("WAVELAB_OUTPUT_DIR", "/tmp/runs")
        env = get_config()
        assert env["WAVELAB_LOG_LEVEL"] == "DEBUG"
        assert env["WAVELAB_OUTPUT_DIR"] == "/tmp/runs"


class TestSerialization:
    def test_float_precision(self):
        assert dumps({"x": 0.1}) == '{"x":0.10000000000000001}'
        assert float(json.loads(dumps({"x": math.pi}))["x"]) == math.pi

    def test_non_finite_becomes_null(self):
        assert dumps({"a": float("nan"), "b": np.inf}) == '{"a":null,"b":null}'

    def test_numpy_scalars_and_bools(self):
        line = dumps({"pass": np.bool_(True), "n": np.int64(3), "v": np.array([1.0, 2.0]), "s": None})
        assert json.loads(line) == {"pass": True, "n": 3, "v": [1.0, 2.0], "s": None}

    def test_unknown_type_rejected(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})

    def test_writers(self, tmp_path):
        path = tmp_path / "rows.ndjson"
        assert write_ndjson(str(path), ({"i": i} for i in range(3))) == 3
        assert path.read_text(encoding="utf-8") == '{"i":0}\n{"i":1}\n{"i":2}\n'
        write_json(str(tmp_path / "one.json"), {"ok": False})
        assert (tmp_path / "one.json").read_text(encoding="utf-8") == '{"ok":false}\n'
