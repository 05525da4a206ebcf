"""Pipeline configuration: one flat JSON object of dotted keys, validated strictly."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .planes import OrientationConfig, RansacConfig
from .rooms import ClipConfig
from .scale import ScaleSearchConfig
from .shape import IspaSchedule, SpaWeights


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "scale.range": [0.1, 10.0],
    "scale.steps": [0.5, 0.1, 0.01],
    "scale.window": 10,
    "scale.warmup_fraction": 0.2,
    "scale.cell_size": 0.1,
    "room.clip_radius": 4.0,
    "room.threshold": 0.5,
    "room.patience": 10,
    "room.cell_size": 0.1,
    "ransac.max_residual": 0.03,
    "ransac.inlier_min": 0.9,
    "ransac.iterations": 100,
    "ransac.seed": 0,
    "orient.sigma0": 0.05,
    "orient.lambda": 0.02,
    "orient.gate": 1.0471975511965976,  # pi / 3
    "orient.accept": 0.3141592653589793,  # pi / 10
    "spa.lambdas.ori": 1.0,
    "spa.lambdas.plane": 1.0,
    "spa.lambdas.mask": 2.0,
    "spa.lambdas.complex": 5.0,
    "spa.rounds": [64, 96, 96],
    "spa.max_edge_len": 8,
    "spa.neighborhood_radius": 5,
    "spa.max_skip": 4,
    "pipeline.workers": 4,
}

_INTS = {"scale.window", "room.patience", "ransac.iterations", "ransac.seed", "spa.max_edge_len",
         "spa.neighborhood_radius", "spa.max_skip", "pipeline.workers"}
_LISTS = {"scale.range": 2, "scale.steps": None, "spa.rounds": None}


def _check(key: str, value):
    if key in _LISTS:
        if not isinstance(value, list) or not value or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"config key '{key}' must be a nonempty list of numbers")
        n = _LISTS[key]
        if n is not None and len(value) != n:
            raise ConfigError(f"config key '{key}' must have {n} entries")
        if key == "spa.rounds" and not all(float(v).is_integer() and v > 0 for v in value):
            raise ConfigError("config key 'spa.rounds' must list positive integer grid sizes")
        return [int(v) for v in value] if key == "spa.rounds" else [float(v) for v in value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number")
    if key in _INTS:
        if not float(value).is_integer():
            raise ConfigError(f"config key '{key}' must be an integer")
        return int(value)
    return float(value)


@dataclass(frozen=True)
class PipelineConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        values = dict(DEFAULTS)
        for key, value in data.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key '{key}'")
            values[key] = _check(key, value)
        cfg = cls(values)
        cfg.build()  # surface range errors from the component configs now
        return cfg

    def __getitem__(self, key: str):
        return self.values[key]

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Override by dotted key with '.' written as '__', e.g. scale__warmup_fraction=1.0."""
        data = {k: v for k, v in self.values.items()}
        data.update({k.replace("__", "."): v for k, v in overrides.items()})
        return PipelineConfig.from_dict(data)

    def digest(self) -> str:
        blob = json.dumps(self.values, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def build(self) -> "Components":
        v = self.values
        try:
            rounds = v["spa.rounds"]
            schedule = IspaSchedule.default(rounds, v["spa.max_edge_len"], v["spa.neighborhood_radius"],
                                            v["spa.max_skip"])
            return Components(
                scale=ScaleSearchConfig(tuple(v["scale.range"]), tuple(v["scale.steps"]), v["scale.window"],
                                        v["scale.warmup_fraction"], v["scale.cell_size"]),
                clip=ClipConfig(v["room.clip_radius"], v["room.threshold"], v["room.patience"],
                                v["room.cell_size"]),
                ransac=RansacConfig(v["ransac.max_residual"], v["ransac.inlier_min"], v["ransac.iterations"],
                                    v["ransac.seed"]),
                orient=replace(OrientationConfig(), sigma0=v["orient.sigma0"], lam=v["orient.lambda"],
                               gate=v["orient.gate"], accept=v["orient.accept"]),
                weights=SpaWeights(v["spa.lambdas.ori"], v["spa.lambdas.plane"], v["spa.lambdas.mask"],
                                   v["spa.lambdas.complex"]),
                schedule=schedule,
                workers=max(1, v["pipeline.workers"]),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class Components:
    scale: ScaleSearchConfig
    clip: ClipConfig
    ransac: RansacConfig
    orient: OrientationConfig
    weights: SpaWeights
    schedule: IspaSchedule
    workers: int


def read_config(path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return PipelineConfig.from_dict(data)
