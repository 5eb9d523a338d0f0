"""Recombination of fallen poses into new initial states.

Each output takes its root orientation from one pool pose and its joint
configuration from another, drawn independently and uniformly (so both may
come from the same pose). Joint angles are clamped into the skeleton's
limits, and the pose is moved to the origin in x/y and lowered or raised
until its lowest body point rests exactly on the ground.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rotations
from .motion_model import PoseSequence, SkeletonSpec, fk_arrays, lowest_point

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PosePool:
    root_pos: np.ndarray    # (N, 3)
    root_quat: np.ndarray   # (N, 4)
    joint_pos: np.ndarray   # (N, D)
    source_tags: tuple[str, ...] = ()
    rng_seed: int = 0

    def __post_init__(self):
        n = len(self.root_quat)
        if n == 0:
            raise ValueError("pose pool is empty")
        if len(self.root_pos) != n or len(self.joint_pos) != n:
            raise ValueError("pool arrays have different lengths")
        if self.source_tags and len(self.source_tags) != n:
            raise ValueError("one source tag per pose required")

    def __len__(self) -> int:
        return len(self.root_quat)

    @classmethod
    def from_sequence(cls, seq: PoseSequence, source_tags: Sequence[str] = (), rng_seed: int = 0) -> "PosePool":
        """Treat every frame of ``seq`` as one pool pose."""
        return cls(
            np.array(seq.root_pos), np.array(seq.root_quat), np.array(seq.joint_pos),
            tuple(source_tags), rng_seed,
        )


@dataclass(frozen=True, eq=False)
class RecombinedPose:
    root_pos: np.ndarray
    root_quat: np.ndarray
    joint_pos: np.ndarray
    orientation_source: int
    joint_source: int
    clamped: bool


def ground_pose(root_quat, joint_pos, skel: SkeletonSpec) -> np.ndarray:
    """Root position at the x/y origin that puts the lowest body at z = 0."""
    pos, _ = fk_arrays(np.zeros(3), root_quat, joint_pos, skel)
    return np.array([0.0, 0.0, -float(lowest_point(pos, skel))])


def recombine(pool: PosePool, count: int, skel: SkeletonSpec, seed: int | None = None) -> list[RecombinedPose]:
    if len(pool) == 0:
        raise ValueError("pose pool is empty")
    if pool.joint_pos.shape[1] != skel.n_dof:
        raise ValueError(f"pool has {pool.joint_pos.shape[1]} DOF, skeleton has {skel.n_dof}")
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.Generator(np.random.PCG64(pool.rng_seed if seed is None else seed))
    n = len(pool)
    r_src = rng.integers(0, n, size=count)
    j_src = rng.integers(0, n, size=count)
    lower, upper = skel.joint_limits[:, 0], skel.joint_limits[:, 1]

    out = []
    n_clamped = 0
    for i, j in zip(r_src, j_src):
        q = rotations.normalize(pool.root_quat[i])
        theta = pool.joint_pos[j]
        clamped = np.clip(theta, lower, upper)
        hit = bool(np.any(clamped != theta))
        n_clamped += hit
        out.append(RecombinedPose(ground_pose(q, clamped, skel), q, clamped, int(i), int(j), hit))
    if n_clamped:
        log.info("clamped joint angles into limits for %d of %d poses", n_clamped, count)
    return out


def poses_to_sequence(poses: Sequence[RecombinedPose], fps: float = 1.0, skeleton_id: str = "") -> PoseSequence:
    if not poses:
        raise ValueError("no poses")
    return PoseSequence(
        fps=fps,
        root_pos=np.stack([p.root_pos for p in poses]),
        root_quat=np.stack([p.root_quat for p in poses]),
        joint_pos=np.stack([p.joint_pos for p in poses]),
        skeleton_id=skeleton_id,
    )
