"""Pipeline configuration from TOML with a strict schema.

Every section maps onto one config dataclass; unknown keys are rejected
with their dotted path, e.g. ``correction.gravty``.

Example::

    [correction]
    velocity_threshold = 0.001
    skip_set = [120, 121]

    [smoothing]
    window_length = "adaptive"
    poly_order = 3

    [rewards.weights]
    feet_slip = -3.0

    [termination]
    tilt = 0.8          # or tau_ori = 0.3033

    [sampling]
    alpha = 0.5
    seed = 7

    [io]
    jobs = 4
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .height_correction import CorrectionConfig
from .rewards import RECOVERY_WEIGHTS, TRACKING_WEIGHTS, RewardConfig
from .smoothing import SGConfig
from .termination import TerminationConfig, tilt_to_gravity_threshold


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SamplingParams:
    alpha: float = 0.5
    w_min: float = 1.0
    w_max: float = 10.0
    seed: int = 0
    plateau_tolerance: float = 0.0


@dataclass(frozen=True)
class IOConfig:
    input_dir: str | None = None
    output_dir: str | None = None
    format_version: int = 1
    jobs: int = 1


@dataclass(frozen=True)
class PipelineConfig:
    correction: CorrectionConfig = field(default_factory=CorrectionConfig)
    smoothing: SGConfig = field(default_factory=SGConfig)
    smoothing_channels: str | tuple[str, ...] = "all"
    rewards: RewardConfig = field(default_factory=RewardConfig)
    termination: TerminationConfig = field(default_factory=TerminationConfig)
    sampling: SamplingParams = field(default_factory=SamplingParams)
    io: IOConfig = field(default_factory=IOConfig)

    def with_overrides(self, section: str, **values) -> "PipelineConfig":
        """Copy with non-None ``values`` replacing fields of one section."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        try:
            updated = dataclasses.replace(getattr(self, section), **values)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{section}: {e}") from e
        return dataclasses.replace(self, **{section: updated})


def _build(cls, data: dict, path: str, extra: tuple[str, ...] = ()):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a table")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names - set(extra))
    if unknown:
        raise ConfigError("unknown config key " + ", ".join(f"{path}.{k}" for k in unknown))
    try:
        return cls(**{k: v for k, v in data.items() if k in names})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from e


def config_from_dict(data: dict[str, Any]) -> PipelineConfig:
    sections = {"correction", "smoothing", "rewards", "termination", "sampling", "io"}
    unknown = sorted(set(data) - sections)
    if unknown:
        raise ConfigError("unknown config key " + ", ".join(unknown))

    corr = dict(data.get("correction", {}))
    if "skip_set" in corr:
        corr["skip_set"] = frozenset(corr["skip_set"])

    smooth = dict(data.get("smoothing", {}))
    channels = smooth.pop("channels", "all")
    if not isinstance(channels, str):
        channels = tuple(channels)

    rew = dict(data.get("rewards", {}))
    weights = rew.get("weights", {})
    if isinstance(weights, dict):
        bad = sorted(set(weights) - set(TRACKING_WEIGHTS) - set(RECOVERY_WEIGHTS))
        if bad:
            raise ConfigError("unknown config key " + ", ".join(f"rewards.weights.{k}" for k in bad))

    term = dict(data.get("termination", {}))
    if "tilt" in term:
        if "tau_ori" in term:
            raise ConfigError("termination: give either tilt or tau_ori, not both")
        term["tau_ori"] = tilt_to_gravity_threshold(float(term.pop("tilt")))

    return PipelineConfig(
        correction=_build(CorrectionConfig, corr, "correction"),
        smoothing=_build(SGConfig, smooth, "smoothing"),
        smoothing_channels=channels,
        rewards=_build(RewardConfig, rew, "rewards"),
        termination=_build(TerminationConfig, term, "termination"),
        sampling=_build(SamplingParams, data.get("sampling", {}), "sampling"),
        io=_build(IOConfig, data.get("io", {}), "io"),
    )


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return config_from_dict(data)
