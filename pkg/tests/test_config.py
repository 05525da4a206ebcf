import json

import pytest

from floorseq.config import DEFAULTS, ConfigError, PipelineConfig, read_config


def test_defaults_build():
    comp = PipelineConfig().build()
    assert comp.scale.window_size == 10 and comp.clip.patience == 10
    assert [r.grid_size for r in comp.schedule.rounds] == [64, 96, 96]
    assert comp.weights.complex == 5.0


def test_unknown_key_is_named(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"scale.window": 12, "room.radius": 3}))
    with pytest.raises(ConfigError, match="room.radius"):
        read_config(p)


@pytest.mark.parametrize("key, value", [
    ("scale.window", 2.5), ("scale.window", "10"), ("ransac.seed", True),
    ("scale.range", [1.0]), ("spa.rounds", [64.5]),
])
def test_type_errors(key, value):
    with pytest.raises(ConfigError, match=key):
        PipelineConfig.from_dict({key: value})


def test_range_errors_surface_as_config_errors():
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"room.threshold": 1.5})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"spa.lambdas.complex": 0})


def test_overrides_and_digest():
    base = PipelineConfig()
    other = base.with_overrides(scale__warmup_fraction=1.0)
    assert other["scale.warmup_fraction"] == 1.0 and base["scale.warmup_fraction"] == 0.2
    assert other.digest() != base.digest()
    assert PipelineConfig.from_dict(dict(DEFAULTS)).digest() == base.digest()


def test_invalid_json_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        read_config(p)
