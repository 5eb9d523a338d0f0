"""Motion-tracking and fall-recovery reward terms.

Tracking terms compare robot and reference body kinematics; "relative"
positions and orientations are expressed in each state's own root frame.
Recovery terms are shaped around shoulder height: they push the robot to
stand up in place and without abrupt actions while its shoulders are far
from the reference.

Terms whose inputs are missing (no contact forces, no previous action) are
reported as unavailable and left out of the total.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import rotations
from .tracking import BodyState, TrackingPair, center_of_mass

log = logging.getLogger(__name__)

TRACKING_WEIGHTS = MappingProxyType({
    "body_pos": 4.0,
    "body_ori": 2.0,
    "body_ang_vel": 1.0,
    "com": 2.0,
    "close_feet": -1000.0,
    "feet_slip": -2.0,
    "root_ori": -1.0,
    "action_rate_knee": -3.0,
    "action_rate_ankle": -20.0,
    "dof_limits": -100.0,
    "undesired_contacts": -0.5,
})

RECOVERY_WEIGHTS = MappingProxyType({
    "shoulder_height": -2.0,
    "xy_move_before_stand": -1.0,
    "action_rate_before_stand": -2.0,
})

KERNEL_TERMS = ("body_pos", "body_ori", "body_ang_vel")


@dataclass(frozen=True)
class RewardConfig:
    weights: Mapping[str, float] = field(default_factory=lambda: {**TRACKING_WEIGHTS, **RECOVERY_WEIGHTS})
    sigma_pos2: float = 0.09
    sigma_ori2: float = 0.25
    sigma_ang_vel2: float = 0.25
    sigma_com2: float = 0.04
    close_feet_distance: float = 0.16   # m
    slip_force_threshold: float = 8.0   # N
    single_support_height: float = 0.02  # m
    undesired_force_threshold: float = 1.0  # N
    recovery_threshold: float = 1.0     # m, shoulder height gap that switches recovery on
    recovery_gate_threshold: float | None = None  # m, defaults to recovery_threshold

    def __post_init__(self):
        merged = {**TRACKING_WEIGHTS, **RECOVERY_WEIGHTS}
        unknown = set(self.weights) - set(merged)
        if unknown:
            raise ValueError(f"unknown reward terms {sorted(unknown)}")
        merged.update({k: float(v) for k, v in self.weights.items()})
        object.__setattr__(self, "weights", merged)
        for name in ("sigma_pos2", "sigma_ori2", "sigma_ang_vel2", "sigma_com2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("close_feet_distance", "slip_force_threshold", "single_support_height",
                     "undesired_force_threshold", "recovery_threshold"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.recovery_gate_threshold is not None and self.recovery_gate_threshold < 0:
            raise ValueError("recovery_gate_threshold must be non-negative")

    @property
    def gate_threshold(self) -> float:
        if self.recovery_gate_threshold is None:
            return self.recovery_threshold
        return self.recovery_gate_threshold


@dataclass(frozen=True)
class TermValue:
    raw: float
    weight: float
    available: bool = True

    @property
    def weighted(self) -> float:
        return self.raw * self.weight if self.available else 0.0


@dataclass
class RewardReport:
    terms: dict[str, TermValue]
    recovery_active: bool = False

    @property
    def total(self) -> float:
        return sum(t.weighted for t in self.terms.values() if t.available)

    def raw(self, name: str) -> float:
        return self.terms[name].raw

    def weighted(self, name: str) -> float:
        return self.terms[name].weighted

    def to_row(self) -> dict:
        row = {}
        for name, t in self.terms.items():
            row[name] = t.raw if t.available else float("nan")
            row[f"{name}_weighted"] = t.weighted if t.available else float("nan")
        row["recovery_active"] = int(self.recovery_active)
        row["total"] = self.total
        return row


def relative_body_positions(state: BodyState) -> np.ndarray:
    """Body positions in the root frame."""
    r = rotations.to_matrix(state.root_quat)
    return (state.body_pos - state.root_pos) @ r


def relative_body_quats(state: BodyState) -> np.ndarray:
    return rotations.multiply(rotations.conjugate(state.root_quat), state.body_quat)


def _tracked(pair: TrackingPair) -> list[int]:
    tracked = pair.skeleton.body_set("tracked")
    return list(tracked) if tracked else list(range(pair.skeleton.n_bodies))


def _feet(pair: TrackingPair) -> list[int]:
    feet = list(pair.skeleton.body_set("feet"))
    if len(feet) != 2:
        raise ValueError(f"skeleton must define exactly two feet, got {feet}")
    return feet


def single_support(state: BodyState, pair: TrackingPair, height: float) -> bool:
    feet = _feet(pair)
    z = state.body_pos[feet, 2] + pair.skeleton.z_offsets[feet]
    return int(np.sum(z < height)) == 1


def shoulder_height(state: BodyState, pair: TrackingPair) -> float:
    shoulders = list(pair.skeleton.body_set("shoulders"))
    if not shoulders:
        raise ValueError("skeleton defines no shoulder bodies")
    return float(np.mean(state.body_pos[shoulders, 2]))


def eval_tracking_rewards(pair: TrackingPair, cfg: RewardConfig | None = None) -> RewardReport:
    cfg = cfg or RewardConfig()
    w = cfg.weights
    skel = pair.skeleton
    rob, ref = pair.robot, pair.reference
    terms: dict[str, TermValue] = {}
    tracked = _tracked(pair)
    feet = _feet(pair)

    dp = relative_body_positions(ref)[tracked] - relative_body_positions(rob)[tracked]
    terms["body_pos"] = TermValue(math.exp(-np.mean(np.sum(dp**2, axis=1)) / cfg.sigma_pos2), w["body_pos"])

    dq = rotations.quat_error(relative_body_quats(ref)[tracked], relative_body_quats(rob)[tracked])
    terms["body_ori"] = TermValue(math.exp(-np.mean(np.sum(dq**2, axis=1)) / cfg.sigma_ori2), w["body_ori"])

    dw = ref.body_ang_vel[tracked] - rob.body_ang_vel[tracked]
    terms["body_ang_vel"] = TermValue(
        math.exp(-np.mean(np.sum(dw**2, axis=1)) / cfg.sigma_ang_vel2), w["body_ang_vel"]
    )

    com_xy = center_of_mass(rob, skel)[:2]
    sole_z = rob.body_pos[feet, 2] + skel.z_offsets[feet]
    lowest_foot_xy = rob.body_pos[feet[int(np.argmin(sole_z))], :2]
    unbalanced = single_support(ref, pair, cfg.single_support_height)
    com_kernel = math.exp(-np.linalg.norm(com_xy - lowest_foot_xy) / cfg.sigma_com2)
    terms["com"] = TermValue(com_kernel * float(unbalanced), w["com"])

    gap = np.linalg.norm(rob.body_pos[feet[0]] - rob.body_pos[feet[1]])
    terms["close_feet"] = TermValue(max(0.0, cfg.close_feet_distance - gap), w["close_feet"])

    force = rob.contact_force[feet]
    if np.any(np.isnan(force)):
        log.warning("foot contact forces unavailable; feet_slip excluded")
        terms["feet_slip"] = TermValue(float("nan"), w["feet_slip"], available=False)
    else:
        speed = np.linalg.norm(rob.body_lin_vel[feet, :2], axis=1)
        terms["feet_slip"] = TermValue(
            float(np.sum(np.sqrt(speed) * (force > cfg.slip_force_threshold))), w["feet_slip"]
        )

    root_err = rotations.quat_error(ref.root_quat, rob.root_quat)
    terms["root_ori"] = TermValue(float(root_err @ root_err), w["root_ori"])

    for name, group in (("action_rate_knee", "knees"), ("action_rate_ankle", "ankles")):
        if pair.action is None or pair.previous_action is None:
            terms[name] = TermValue(float("nan"), w[name], available=False)
            continue
        joints = skel.joints_of(group)
        da = np.asarray(pair.action)[joints] - np.asarray(pair.previous_action)[joints]
        terms[name] = TermValue(float(np.sum(da**2)), w[name])

    lower, upper = skel.joint_limits[:, 0], skel.joint_limits[:, 1]
    q = rob.joint_pos
    over = np.clip(q - upper, 0.0, np.inf) + np.clip(lower - q, 0.0, np.inf)
    terms["dof_limits"] = TermValue(float(np.sum(over)), w["dof_limits"])

    undesired = list(skel.body_set("undesired_contact_bodies"))
    f = rob.contact_force[undesired]
    if np.any(np.isnan(f)):
        log.warning("undesired-contact forces unavailable; term excluded")
        terms["undesired_contacts"] = TermValue(float("nan"), w["undesired_contacts"], available=False)
    else:
        terms["undesired_contacts"] = TermValue(
            float(np.sum(f > cfg.undesired_force_threshold)), w["undesired_contacts"]
        )
    return RewardReport(terms)


def recovery_indicator(pair: TrackingPair, cfg: RewardConfig | None = None) -> bool:
    """True when mean shoulder heights differ by strictly more than the threshold."""
    cfg = cfg or RewardConfig()
    gap = abs(shoulder_height(pair.reference, pair) - shoulder_height(pair.robot, pair))
    return gap > cfg.recovery_threshold


def eval_recovery_rewards(pair: TrackingPair, cfg: RewardConfig | None = None) -> RewardReport:
    cfg = cfg or RewardConfig()
    if pair.action is None or pair.previous_action is None or pair.previous_com_xy is None:
        raise ValueError("recovery rewards need action, previous_action and previous_com_xy")
    w = cfg.weights
    shoulders = list(pair.skeleton.body_set("shoulders"))
    if not shoulders:
        raise ValueError("skeleton defines no shoulder bodies")
    dz = pair.reference.body_pos[shoulders, 2] - pair.robot.body_pos[shoulders, 2]
    gap = abs(shoulder_height(pair.reference, pair) - shoulder_height(pair.robot, pair))
    gate = float(gap > cfg.gate_threshold)

    com_xy = center_of_mass(pair.robot, pair.skeleton)[:2]
    drift = float(np.linalg.norm(com_xy - np.asarray(pair.previous_com_xy, float)))
    da = np.asarray(pair.action, float) - np.asarray(pair.previous_action, float)
    terms = {
        "shoulder_height": TermValue(float(np.sum(dz**2)), w["shoulder_height"]),
        "xy_move_before_stand": TermValue(gate * drift, w["xy_move_before_stand"]),
        "action_rate_before_stand": TermValue(gate * float(np.sum(da**2)), w["action_rate_before_stand"]),
    }
    return RewardReport(terms, recovery_active=recovery_indicator(pair, cfg))


def eval_rewards(pair: TrackingPair, cfg: RewardConfig | None = None) -> RewardReport:
    """Tracking reward plus the recovery reward when recovery is active."""
    cfg = cfg or RewardConfig()
    report = eval_tracking_rewards(pair, cfg)
    active = recovery_indicator(pair, cfg)
    if pair.action is not None and pair.previous_action is not None and pair.previous_com_xy is not None:
        rec = eval_recovery_rewards(pair, cfg)
        for name, t in rec.terms.items():
            # inactive recovery terms stay visible but carry no weight
            report.terms[name] = t if active else TermValue(t.raw, 0.0)
    report.recovery_active = active
    return report
