"""Per-frame body kinematics of a robot state and its reference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rotations
from .motion_model import PoseSequence, SkeletonSpec, check_compatible, fk_arrays


@dataclass(frozen=True, eq=False)
class BodyState:
    """World-frame kinematics of every body at one instant.

    Velocities are per second. ``contact_force`` holds the vertical contact
    force on each body in newtons, NaN where unknown.
    """

    root_pos: np.ndarray
    root_quat: np.ndarray
    joint_pos: np.ndarray
    body_pos: np.ndarray       # (B, 3)
    body_quat: np.ndarray      # (B, 4)
    body_lin_vel: np.ndarray   # (B, 3)
    body_ang_vel: np.ndarray   # (B, 3)
    contact_force: np.ndarray  # (B,)

    @classmethod
    def at_rest(cls, root_pos, root_quat, joint_pos, skel: SkeletonSpec, contact_force=None) -> "BodyState":
        """State with zero velocities, built from a single pose."""
        pos, rot = fk_arrays(np.asarray(root_pos, float), np.asarray(root_quat, float), np.asarray(joint_pos, float), skel)
        b = skel.n_bodies
        force = np.full(b, np.nan) if contact_force is None else np.asarray(contact_force, float)
        return cls(
            np.asarray(root_pos, float), np.asarray(root_quat, float), np.asarray(joint_pos, float),
            pos, rotations.from_matrix(rot), np.zeros((b, 3)), np.zeros((b, 3)), force,
        )


@dataclass(frozen=True, eq=False)
class TrackingPair:
    robot: BodyState
    reference: BodyState
    skeleton: SkeletonSpec
    action: np.ndarray | None = None
    previous_action: np.ndarray | None = None
    previous_com_xy: np.ndarray | None = None

    def __post_init__(self):
        if self.robot.body_pos.shape != self.reference.body_pos.shape:
            raise ValueError("robot and reference body counts differ")
        if self.robot.body_pos.shape[0] != self.skeleton.n_bodies:
            raise ValueError("body count does not match skeleton")


def center_of_mass(state: BodyState, skel: SkeletonSpec) -> np.ndarray:
    m = skel.masses
    return (m[:, None] * state.body_pos).sum(axis=0) / m.sum()


def sequence_body_states(seq: PoseSequence, skel: SkeletonSpec) -> list[BodyState]:
    """Body kinematics of every frame, velocities by forward difference.

    Per-foot forces in ``seq.contact_force`` are assigned to the skeleton's
    ``feet`` body set in order; all other bodies get NaN.
    """
    check_compatible(seq, skel)
    pos, rot = fk_arrays(seq.root_pos, seq.root_quat, seq.joint_pos, skel)
    quat = rotations.from_matrix(rot)
    n, b = pos.shape[:2]
    lin = np.zeros_like(pos)
    ang = np.zeros_like(pos)
    if n >= 2:
        lin[:-1] = (pos[1:] - pos[:-1]) * seq.fps
        lin[-1] = lin[-2]
        ang[:-1] = rotations.log_map(rotations.multiply(quat[1:], rotations.conjugate(quat[:-1]))) * seq.fps
        ang[-1] = ang[-2]
    forces = np.full((n, b), np.nan)
    feet = list(skel.body_set("feet"))
    if seq.contact_force is not None and feet:
        k = min(len(feet), seq.contact_force.shape[1])
        forces[:, feet[:k]] = seq.contact_force[:, :k]
    return [
        BodyState(seq.root_pos[t], seq.root_quat[t], seq.joint_pos[t], pos[t], quat[t], lin[t], ang[t], forces[t])
        for t in range(n)
    ]
