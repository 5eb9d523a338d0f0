"""Bad-tracking detection and the consecutive-bad-step termination rule.

Outside recovery the episode ends on the first bad step. While recovering
it ends only once ``tau_bad`` consecutive steps have been bad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rotations import projected_gravity
from .tracking import TrackingPair

DEFAULT_TILT = 0.8  # rad


def tilt_to_gravity_threshold(angle: float) -> float:
    """Change of the projected-gravity z component when an upright frame tilts by ``angle``."""
    return 1.0 - math.cos(angle)


@dataclass(frozen=True)
class TerminationConfig:
    tau_pos: float = 0.5   # m
    tau_ori: float = tilt_to_gravity_threshold(DEFAULT_TILT)
    tau_body: float = 0.5  # m
    tau_bad: int = 50      # steps

    def __post_init__(self):
        for name in ("tau_pos", "tau_ori", "tau_body", "tau_bad"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_tilt(cls, angle: float, **kwargs) -> "TerminationConfig":
        return cls(tau_ori=tilt_to_gravity_threshold(angle), **kwargs)


@dataclass(frozen=True)
class BadTrackingFlags:
    position: bool
    orientation: bool
    body: bool

    @property
    def bad(self) -> bool:
        return self.position or self.orientation or self.body


def eval_bad_tracking(pair: TrackingPair, cfg: TerminationConfig | None = None) -> BadTrackingFlags:
    cfg = cfg or TerminationConfig()
    ref, rob = pair.reference, pair.robot
    pos = np.linalg.norm(ref.root_pos - rob.root_pos) > cfg.tau_pos
    g_ref = projected_gravity(ref.root_quat)
    g_rob = projected_gravity(rob.root_quat)
    ori = abs(g_ref[2] - g_rob[2]) > cfg.tau_ori
    body = np.any(np.linalg.norm(ref.body_pos - rob.body_pos, axis=1) > cfg.tau_body)
    return BadTrackingFlags(bool(pos), bool(ori), bool(body))


class TerminatedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TerminationState:
    bad_run: int = 0
    last_flags: BadTrackingFlags | None = field(default=None, compare=False)
    terminated: bool = False
    steps: int = 0


def step_termination(
    state: TerminationState,
    bad: bool | BadTrackingFlags,
    recovering: bool,
    cfg: TerminationConfig | None = None,
) -> TerminationState:
    cfg = cfg or TerminationConfig()
    if state.terminated:
        raise TerminatedError("episode already terminated")
    flags = bad if isinstance(bad, BadTrackingFlags) else None
    is_bad = flags.bad if flags is not None else bool(bad)
    run = state.bad_run + 1 if is_bad else 0
    terminated = run >= cfg.tau_bad if recovering else is_bad
    return TerminationState(run, flags, terminated, state.steps + 1)


def first_termination(bad: list[bool], recovering: list[bool], cfg: TerminationConfig | None = None) -> int | None:
    """Index of the step at which the episode terminates, or None."""
    state = TerminationState()
    for k, (b, r) in enumerate(zip(bad, recovering)):
        state = step_termination(state, b, r, cfg)
        if state.terminated:
            return k
    return None
