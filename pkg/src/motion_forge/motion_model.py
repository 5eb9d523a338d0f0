"""Pose sequences, skeletons and forward kinematics.

A skeleton is a topologically sorted tree of point bodies. Each body sits at
a fixed offset from its parent (expressed in the parent frame) and, if it
has a joint axis, rotates about that axis by one joint angle. The root body
is placed by the frame's root pose.

Sequences store their frames column-wise as numpy arrays; ``Frame`` is a
per-frame view for callers that want one.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import rotations

log = logging.getLogger(__name__)

UNIT_QUAT_TOL = 1e-6
BODY_CACHE_TOL = 1e-9


class SkeletonMismatchError(ValueError):
    """Sequence and skeleton disagree on DOF or body count."""


@dataclass(frozen=True)
class Body:
    name: str
    parent: int | None
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    axis: tuple[float, float, float] | None = None
    mass: float = 1.0
    # added to the body's world z when computing the lowest point, e.g. a
    # negative value approximates a foot sole below the link origin
    z_offset: float = 0.0


@dataclass(frozen=True, eq=False)
class SkeletonSpec:
    bodies: tuple[Body, ...]
    dof_map: tuple[int, ...] | None = None
    body_sets: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    joint_limits: np.ndarray | None = None
    name: str = "skeleton"

    def __post_init__(self):
        bodies = tuple(self.bodies)
        object.__setattr__(self, "bodies", bodies)
        if not bodies:
            raise ValueError("skeleton has no bodies")
        roots = [i for i, b in enumerate(bodies) if b.parent is None]
        if roots != [0]:
            raise ValueError(f"skeleton must have exactly one root at index 0, got {roots}")
        for i, b in enumerate(bodies):
            if b.parent is not None and not 0 <= b.parent < i:
                raise ValueError(f"body {i} ({b.name}): parent {b.parent} must precede it")
            if b.axis is not None and abs(np.linalg.norm(b.axis) - 1.0) > 1e-9:
                raise ValueError(f"body {i} ({b.name}): joint axis is not unit length")

        jointed = [i for i, b in enumerate(bodies) if b.axis is not None]
        dof_map = tuple(jointed) if self.dof_map is None else tuple(int(i) for i in self.dof_map)
        if sorted(dof_map) != jointed:
            raise ValueError("dof_map must list every jointed body exactly once")
        object.__setattr__(self, "dof_map", dof_map)

        sets = {}
        for key, idx in dict(self.body_sets).items():
            idx = tuple(int(i) for i in idx)
            bad = [i for i in idx if not 0 <= i < len(bodies)]
            if bad:
                raise ValueError(f"body set {key!r} references invalid bodies {bad}")
            sets[key] = idx
        object.__setattr__(self, "body_sets", sets)

        if self.joint_limits is None:
            limits = np.tile([-np.inf, np.inf], (len(dof_map), 1))
        else:
            limits = np.array(self.joint_limits, dtype=float).reshape(-1, 2)
        if limits.shape[0] != len(dof_map):
            raise ValueError(f"expected {len(dof_map)} joint limits, got {limits.shape[0]}")
        if np.any(limits[:, 0] > limits[:, 1]):
            raise ValueError("joint limit lower bound exceeds upper bound")
        limits.setflags(write=False)
        object.__setattr__(self, "joint_limits", limits)

    @property
    def n_bodies(self) -> int:
        return len(self.bodies)

    @property
    def n_dof(self) -> int:
        return len(self.dof_map)

    @property
    def masses(self) -> np.ndarray:
        return np.array([b.mass for b in self.bodies])

    @property
    def z_offsets(self) -> np.ndarray:
        return np.array([b.z_offset for b in self.bodies])

    def body_index(self, name: str) -> int:
        for i, b in enumerate(self.bodies):
            if b.name == name:
                return i
        raise KeyError(name)

    def body_set(self, key: str) -> tuple[int, ...]:
        return self.body_sets.get(key, ())

    def joints_of(self, key: str) -> list[int]:
        """Joint indices whose driven body belongs to the named body set."""
        members = set(self.body_set(key))
        return [j for j, b in enumerate(self.dof_map) if b in members]

    @property
    def joint_names(self) -> list[str]:
        return [self.bodies[b].name for b in self.dof_map]


@dataclass(frozen=True)
class Frame:
    root_pos: np.ndarray
    root_quat: np.ndarray
    joint_pos: np.ndarray
    joint_vel: np.ndarray | None = None
    body_pos: np.ndarray | None = None
    contact_force: np.ndarray | None = None


def _frozen(a, ndim: int | None = None, name: str = "") -> np.ndarray | None:
    if a is None:
        return None
    a = np.array(a, dtype=float)
    if ndim is not None and a.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} dimensions, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Time-indexed root poses and joint angles.

    Shapes: root_pos (T, 3), root_quat (T, 4) as (w, x, y, z), joint_pos
    (T, D). Optional: joint_vel (T, D), body_pos (T, B, 3) cached FK output,
    contact_force (T, F) vertical force per foot in newtons.
    """

    fps: float
    root_pos: np.ndarray
    root_quat: np.ndarray
    joint_pos: np.ndarray
    skeleton_id: str = ""
    joint_vel: np.ndarray | None = None
    body_pos: np.ndarray | None = None
    contact_force: np.ndarray | None = None

    def __post_init__(self):
        fps = float(self.fps)
        if not fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "fps", fps)
        rp = _frozen(self.root_pos, 2, "root_pos")
        rq = _frozen(self.root_quat, 2, "root_quat")
        jp = _frozen(self.joint_pos, 2, "joint_pos")
        n = rp.shape[0]
        if n == 0:
            raise ValueError("a pose sequence needs at least one frame")
        if rp.shape != (n, 3) or rq.shape != (n, 4) or jp.shape[0] != n:
            raise ValueError(
                f"inconsistent frame arrays: root_pos {rp.shape}, root_quat {rq.shape}, joint_pos {jp.shape}"
            )
        norms = np.linalg.norm(rq, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_QUAT_TOL)
        if bad.size:
            raise ValueError(f"root quaternion not unit norm at frames {bad[:5].tolist()}")
        object.__setattr__(self, "root_pos", rp)
        object.__setattr__(self, "root_quat", rq)
        object.__setattr__(self, "joint_pos", jp)

        jv = _frozen(self.joint_vel, 2, "joint_vel")
        if jv is not None and jv.shape != jp.shape:
            raise ValueError("joint_vel shape must match joint_pos")
        bp = _frozen(self.body_pos, 3, "body_pos")
        if bp is not None and (bp.shape[0] != n or bp.shape[2] != 3):
            raise ValueError("body_pos must have shape (T, B, 3)")
        cf = _frozen(self.contact_force, 2, "contact_force")
        if cf is not None and cf.shape[0] != n:
            raise ValueError("contact_force must have one row per frame")
        object.__setattr__(self, "joint_vel", jv)
        object.__setattr__(self, "body_pos", bp)
        object.__setattr__(self, "contact_force", cf)

    def __len__(self) -> int:
        return self.root_pos.shape[0]

    @property
    def n_frames(self) -> int:
        return len(self)

    @property
    def n_dof(self) -> int:
        return self.joint_pos.shape[1]

    def frame(self, i: int) -> Frame:
        _check_index(self, i)

        def pick(a):
            return None if a is None else a[i]

        return Frame(
            self.root_pos[i], self.root_quat[i], self.joint_pos[i],
            pick(self.joint_vel), pick(self.body_pos), pick(self.contact_force),
        )

    @property
    def frames(self) -> list[Frame]:
        return [self.frame(i) for i in range(len(self))]

    def replace(self, **changes) -> "PoseSequence":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_frames(cls, frames: Sequence[Frame], fps: float, skeleton_id: str = "") -> "PoseSequence":
        if not frames:
            raise ValueError("a pose sequence needs at least one frame")

        def stack(attr):
            vals = [getattr(f, attr) for f in frames]
            if all(v is None for v in vals):
                return None
            if any(v is None for v in vals):
                raise ValueError(f"{attr} present on some frames only")
            return np.stack([np.asarray(v, dtype=float) for v in vals])

        return cls(
            fps=fps,
            root_pos=stack("root_pos"),
            root_quat=stack("root_quat"),
            joint_pos=stack("joint_pos"),
            skeleton_id=skeleton_id,
            joint_vel=stack("joint_vel"),
            body_pos=stack("body_pos"),
            contact_force=stack("contact_force"),
        )


def _check_index(seq: PoseSequence, i: int) -> None:
    if not -len(seq) <= i < len(seq):
        raise IndexError(f"frame index {i} out of range for {len(seq)} frames")


def check_compatible(seq: PoseSequence, skel: SkeletonSpec) -> None:
    if seq.n_dof != skel.n_dof:
        raise SkeletonMismatchError(
            f"sequence has {seq.n_dof} joint values per frame, skeleton {skel.name!r} has {skel.n_dof} DOF"
        )
    if seq.body_pos is not None and seq.body_pos.shape[1] != skel.n_bodies:
        raise SkeletonMismatchError(
            f"cached body_pos has {seq.body_pos.shape[1]} bodies, skeleton has {skel.n_bodies}"
        )


def axis_angle_matrix(axis, angle) -> np.ndarray:
    """Rodrigues rotation about a fixed unit axis for an array of angles."""
    angle = np.asarray(angle, dtype=float)
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    s = np.sin(angle)[..., None, None]
    c = np.cos(angle)[..., None, None]
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def fk_arrays(
    root_pos: np.ndarray, root_quat: np.ndarray, joint_pos: np.ndarray, skel: SkeletonSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Batched FK. Returns world positions (..., B, 3) and rotations (..., B, 3, 3)."""
    root_pos = np.asarray(root_pos, dtype=float)
    joint_pos = np.asarray(joint_pos, dtype=float)
    lead = root_pos.shape[:-1]
    r_root = rotations.to_matrix(root_quat)
    pos = np.empty(lead + (skel.n_bodies, 3))
    rot = np.empty(lead + (skel.n_bodies, 3, 3))
    joint_of = {b: j for j, b in enumerate(skel.dof_map)}
    for i, body in enumerate(skel.bodies):
        offset = np.asarray(body.offset, dtype=float)
        if body.parent is None:
            p_base, r_base = root_pos, r_root
        else:
            p_base, r_base = pos[..., body.parent, :], rot[..., body.parent, :, :]
        pos[..., i, :] = p_base + r_base @ offset
        if body.axis is None:
            rot[..., i, :, :] = r_base
        else:
            rot[..., i, :, :] = r_base @ axis_angle_matrix(body.axis, joint_pos[..., joint_of[i]])
    return pos, rot


class BodyPoses(NamedTuple):
    positions: np.ndarray
    rotations: np.ndarray
    # None when the frame has no cached body_pos, else whether it disagrees with FK
    cache_stale: bool | None


def forward_kinematics(seq: PoseSequence, skel: SkeletonSpec, frame_index: int) -> BodyPoses:
    _check_index(seq, frame_index)
    check_compatible(seq, skel)
    pos, rot = fk_arrays(
        seq.root_pos[frame_index], seq.root_quat[frame_index], seq.joint_pos[frame_index], skel
    )
    stale = None
    if seq.body_pos is not None:
        stale = bool(np.max(np.abs(seq.body_pos[frame_index] - pos)) > BODY_CACHE_TOL)
        if stale:
            log.warning("cached body_pos at frame %d disagrees with forward kinematics", frame_index)
    return BodyPoses(pos, rot, stale)


def forward_kinematics_all(seq: PoseSequence, skel: SkeletonSpec) -> tuple[np.ndarray, np.ndarray]:
    check_compatible(seq, skel)
    return fk_arrays(seq.root_pos, seq.root_quat, seq.joint_pos, skel)


def lowest_point(body_positions: np.ndarray, skel: SkeletonSpec) -> np.ndarray:
    """Minimum body height for positions of shape (..., B, 3)."""
    return np.min(body_positions[..., 2] + skel.z_offsets, axis=-1)


def min_body_height(seq: PoseSequence, skel: SkeletonSpec, frame_index: int) -> float:
    return float(lowest_point(forward_kinematics(seq, skel, frame_index).positions, skel))


def min_body_heights(seq: PoseSequence, skel: SkeletonSpec) -> np.ndarray:
    """Per-frame minimum body height, shape (T,)."""
    pos, _ = forward_kinematics_all(seq, skel)
    return lowest_point(pos, skel)


class Velocities(NamedTuple):
    joint: np.ndarray    # (T, D)
    linear: np.ndarray   # (T, 3) root
    angular: np.ndarray  # (T, 3) root, world frame


def forward_difference(x: np.ndarray) -> np.ndarray:
    """x[t+1] - x[t] along axis 0, last row repeating the one before it."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("forward differences need at least 2 frames")
    d = np.empty_like(x)
    d[:-1] = x[1:] - x[:-1]
    d[-1] = d[-2]
    return d


def angular_difference(quats: np.ndarray) -> np.ndarray:
    """Rotation vector of q[t+1] ⊗ conj(q[t]), last row repeated."""
    quats = np.asarray(quats, dtype=float)
    if quats.shape[0] < 2:
        raise ValueError("forward differences need at least 2 frames")
    d = np.empty(quats.shape[:-1] + (3,))
    d[:-1] = rotations.log_map(rotations.multiply(quats[1:], rotations.conjugate(quats[:-1])))
    d[-1] = d[-2]
    return d


def finite_difference_velocities(seq: PoseSequence, per_second: bool = False) -> Velocities:
    """Forward-difference joint, root linear and root angular velocities.

    With ``per_second=False`` the values are raw per-frame differences
    (rad/frame, m/frame); otherwise all three are multiplied by fps.
    """
    if len(seq) < 2:
        raise ValueError("finite differences need at least 2 frames")
    scale = seq.fps if per_second else 1.0
    return Velocities(
        forward_difference(seq.joint_pos) * scale,
        forward_difference(seq.root_pos) * scale,
        angular_difference(seq.root_quat) * scale,
    )


def with_root_heights(seq: PoseSequence, heights: Iterable[float]) -> PoseSequence:
    """Copy of ``seq`` with root z replaced; cached body positions are dropped."""
    heights = np.asarray(list(heights) if not isinstance(heights, np.ndarray) else heights, dtype=float)
    if heights.shape != (len(seq),):
        raise ValueError("need one height per frame")
    root = np.array(seq.root_pos)
    root[:, 2] = heights
    return seq.replace(root_pos=root, body_pos=None)
