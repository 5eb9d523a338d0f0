"""Dataset-level kinematic statistics.

The reported velocities are *signed* means of raw per-frame forward
differences, averaged over every frame and every channel. They are not
speeds: opposite motions cancel, and a dataset can legitimately report a
negative mean joint velocity. Only the T - 1 genuine differences of each
sequence are averaged (the padded final frame is excluded), which makes the
means flip sign exactly when every sequence is played backwards.

Sequences are pooled by summation, so the dataset mean equals the mean over
the concatenation of all difference samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .motion_model import PoseSequence, SkeletonSpec, check_compatible, finite_difference_velocities

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "sequences", "fps", "joint_vel", "body_lin_vel", "body_ang_vel", "frames",
    "body_lin_vel_x", "body_lin_vel_y", "body_lin_vel_z",
    "body_ang_vel_x", "body_ang_vel_y", "body_ang_vel_z",
)


@dataclass(frozen=True)
class DatasetStats:
    fps: float
    mean_joint_vel: float            # rad/frame
    mean_body_lin_vel: float         # m/frame, averaged over x, y, z
    mean_body_ang_vel: float         # rad/frame, averaged over axes
    mean_frames: float
    sequence_count: int
    body_lin_vel_axes: tuple[float, float, float] = (0.0, 0.0, 0.0)
    body_ang_vel_axes: tuple[float, float, float] = (0.0, 0.0, 0.0)
    # number of per-frame difference samples pooled; needed to merge stats
    sample_count: int = 0
    total_frames: int = 0
    joint_channels: int = field(default=0, repr=False)

    def as_row(self) -> dict:
        return {
            "sequences": self.sequence_count,
            "fps": self.fps,
            "joint_vel": self.mean_joint_vel,
            "body_lin_vel": self.mean_body_lin_vel,
            "body_ang_vel": self.mean_body_ang_vel,
            "frames": self.mean_frames,
            "body_lin_vel_x": self.body_lin_vel_axes[0],
            "body_lin_vel_y": self.body_lin_vel_axes[1],
            "body_lin_vel_z": self.body_lin_vel_axes[2],
            "body_ang_vel_x": self.body_ang_vel_axes[0],
            "body_ang_vel_y": self.body_ang_vel_axes[1],
            "body_ang_vel_z": self.body_ang_vel_axes[2],
        }


def _sequence_stats(seq: PoseSequence) -> DatasetStats:
    vel = finite_difference_velocities(seq)
    m = len(seq) - 1
    joint = vel.joint[:m]
    lin = vel.linear[:m].mean(axis=0)
    ang = vel.angular[:m].mean(axis=0)
    return DatasetStats(
        fps=seq.fps,
        mean_joint_vel=float(joint.mean()) if joint.size else 0.0,
        mean_body_lin_vel=float(lin.mean()),
        mean_body_ang_vel=float(ang.mean()),
        mean_frames=float(len(seq)),
        sequence_count=1,
        body_lin_vel_axes=tuple(float(v) for v in lin),
        body_ang_vel_axes=tuple(float(v) for v in ang),
        sample_count=m,
        total_frames=len(seq),
        joint_channels=joint.shape[1],
    )


def combine_stats(parts: Iterable[DatasetStats]) -> DatasetStats:
    """Pool per-sequence or per-dataset stats, weighting by sample count."""
    parts = [p for p in parts if p.sequence_count > 0]
    if not parts:
        raise ValueError("no statistics to combine")
    n = sum(p.sample_count for p in parts)
    count = sum(p.sequence_count for p in parts)
    frames = sum(p.total_frames for p in parts)
    fps = {p.fps for p in parts}
    if len(fps) > 1:
        log.warning("pooling sequences with different frame rates %s", sorted(fps))

    def pooled(getter):
        return sum(getter(p) * p.sample_count for p in parts) / n

    lin = tuple(pooled(lambda p, k=k: p.body_lin_vel_axes[k]) for k in range(3))
    ang = tuple(pooled(lambda p, k=k: p.body_ang_vel_axes[k]) for k in range(3))
    return DatasetStats(
        fps=pooled(lambda p: p.fps),
        mean_joint_vel=pooled(lambda p: p.mean_joint_vel),
        mean_body_lin_vel=float(np.mean(lin)),
        mean_body_ang_vel=float(np.mean(ang)),
        mean_frames=frames / count,
        sequence_count=count,
        body_lin_vel_axes=lin,
        body_ang_vel_axes=ang,
        sample_count=n,
        total_frames=frames,
        joint_channels=parts[0].joint_channels,
    )


def compute_stats(seqs: Iterable[PoseSequence], skel: SkeletonSpec | None = None) -> DatasetStats:
    seqs = list(seqs)
    if not seqs:
        raise ValueError("compute_stats needs at least one sequence")
    parts = []
    for i, seq in enumerate(seqs):
        if skel is not None:
            check_compatible(seq, skel)
        if len(seq) < 2:
            log.warning("sequence %d has a single frame; skipped", i)
            continue
        parts.append(_sequence_stats(seq))
    if not parts:
        raise ValueError("every sequence had fewer than 2 frames")
    return combine_stats(parts)
