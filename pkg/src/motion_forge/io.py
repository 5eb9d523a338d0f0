"""Motion file reading and writing.

Motion documents are JSON::

    {
      "format": "motion-forge",
      "version": 1,
      "fps": 50.0,
      "skeleton": {
        "name": "...",
        "bodies": [{"name", "parent", "offset", "axis", "mass", "z_offset"}, ...],
        "dof_map": [body index per joint],
        "body_sets": {"feet": [...], "shoulders": [...], ...},
        "joint_limits": [[lower, upper], ...]
      },
      "frames": [
        {"root_pos": [x, y, z], "root_quat": [w, x, y, z], "joint_pos": [...],
         "joint_vel": [...], "body_pos": [[x, y, z], ...], "contact_force": [...]},
        ...
      ]
    }

Quaternions are always (w, x, y, z). Optional frame keys must be present on
every frame or on none. Floats are written with Python's shortest round-trip
repr, so a load/save cycle is lossless.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .motion_model import Body, PoseSequence, SkeletonSpec, check_compatible

FORMAT_NAME = "motion-forge"
FORMAT_VERSION = 1
_OPTIONAL = ("joint_vel", "body_pos", "contact_force")


class MotionFormatError(ValueError):
    pass


def _limit(v: float) -> Any:
    # JSON has no infinity; unbounded limits serialize as null
    return None if math.isinf(v) else float(v)


def skeleton_to_dict(skel: SkeletonSpec) -> dict:
    bodies = []
    for b in skel.bodies:
        d = {"name": b.name, "parent": b.parent, "offset": [float(v) for v in b.offset]}
        d["axis"] = None if b.axis is None else [float(v) for v in b.axis]
        d["mass"] = float(b.mass)
        d["z_offset"] = float(b.z_offset)
        bodies.append(d)
    return {
        "name": skel.name,
        "bodies": bodies,
        "dof_map": list(skel.dof_map),
        "body_sets": {k: list(v) for k, v in sorted(skel.body_sets.items())},
        "joint_limits": [[_limit(lo), _limit(hi)] for lo, hi in skel.joint_limits],
    }


def skeleton_from_dict(d: dict) -> SkeletonSpec:
    try:
        bodies = tuple(
            Body(
                name=str(b["name"]),
                parent=None if b.get("parent") is None else int(b["parent"]),
                offset=tuple(float(v) for v in b.get("offset", (0.0, 0.0, 0.0))),
                axis=None if b.get("axis") is None else tuple(float(v) for v in b["axis"]),
                mass=float(b.get("mass", 1.0)),
                z_offset=float(b.get("z_offset", 0.0)),
            )
            for b in d["bodies"]
        )
        limits = d.get("joint_limits")
        if limits is not None:
            limits = [
                [-math.inf if lo is None else lo, math.inf if hi is None else hi] for lo, hi in limits
            ]
        return SkeletonSpec(
            bodies=bodies,
            dof_map=d.get("dof_map"),
            body_sets={k: tuple(v) for k, v in d.get("body_sets", {}).items()},
            joint_limits=limits,
            name=str(d.get("name", "skeleton")),
        )
    except (KeyError, TypeError) as e:
        raise MotionFormatError(f"malformed skeleton: {e!r}") from e


def motion_to_dict(seq: PoseSequence, skel: SkeletonSpec) -> dict:
    check_compatible(seq, skel)
    frames = []
    for i in range(len(seq)):
        f = {
            "root_pos": seq.root_pos[i].tolist(),
            "root_quat": seq.root_quat[i].tolist(),
            "joint_pos": seq.joint_pos[i].tolist(),
        }
        for key in _OPTIONAL:
            arr = getattr(seq, key)
            if arr is not None:
                f[key] = arr[i].tolist()
        frames.append(f)
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "fps": seq.fps,
        "skeleton": skeleton_to_dict(skel),
        "frames": frames,
    }


def motion_from_dict(d: dict) -> tuple[PoseSequence, SkeletonSpec]:
    if not isinstance(d, dict):
        raise MotionFormatError("motion document must be a JSON object")
    version = d.get("version")
    if version != FORMAT_VERSION:
        raise MotionFormatError(f"unsupported motion format version {version!r}")
    for key in ("fps", "skeleton", "frames"):
        if key not in d:
            raise MotionFormatError(f"motion document missing {key!r}")
    skel = skeleton_from_dict(d["skeleton"])
    frames = d["frames"]
    if not isinstance(frames, list) or not frames:
        raise MotionFormatError("motion document has no frames")
    try:
        arrays = {
            key: np.array([f[key] for f in frames], dtype=float)
            for key in ("root_pos", "root_quat", "joint_pos")
        }
    except (KeyError, ValueError, TypeError) as e:
        raise MotionFormatError(f"malformed frames: {e!r}") from e
    if arrays["joint_pos"].ndim == 1:
        arrays["joint_pos"] = arrays["joint_pos"].reshape(len(frames), -1)
    for key in _OPTIONAL:
        present = [key in f for f in frames]
        if any(present):
            if not all(present):
                raise MotionFormatError(f"{key} present on some frames only")
            arrays[key] = np.array([f[key] for f in frames], dtype=float)
            if key == "contact_force" and arrays[key].ndim == 1:
                arrays[key] = arrays[key].reshape(len(frames), -1)
    try:
        seq = PoseSequence(fps=d["fps"], skeleton_id=skel.name, **arrays)
        check_compatible(seq, skel)
    except ValueError as e:
        raise MotionFormatError(str(e)) from e
    return seq, skel


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def load_motion(path: str | Path) -> tuple[PoseSequence, SkeletonSpec]:
    try:
        text = Path(path).read_text()
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MotionFormatError(f"{path}: invalid JSON ({e})") from e
    return motion_from_dict(doc)


def save_motion(path: str | Path, seq: PoseSequence, skel: SkeletonSpec) -> None:
    Path(path).write_text(dumps(motion_to_dict(seq, skel)))


def csv_header(skel: SkeletonSpec) -> list[str]:
    return (
        ["root_x", "root_y", "root_z", "quat_w", "quat_x", "quat_y", "quat_z"]
        + [f"joint_{name}" for name in skel.joint_names]
    )


def save_csv(path: str | Path, seq: PoseSequence, skel: SkeletonSpec) -> None:
    """Flat export, one row per frame: root_pos xyz, root_quat wxyz, joint_pos."""
    check_compatible(seq, skel)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header(skel))
        for row in np.hstack([seq.root_pos, seq.root_quat, seq.joint_pos]):
            w.writerow([repr(float(v)) for v in row])


def load_pool(path: str | Path) -> tuple[PoseSequence, SkeletonSpec]:
    """Fall-pose pool as one sequence whose frames are the poses.

    Accepts a single motion document, or a list (bare or under
    ``"sequences"``) of single-frame motion documents sharing a skeleton.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise MotionFormatError(f"{path}: invalid JSON ({e})") from e
    if isinstance(doc, dict) and "sequences" in doc:
        doc = doc["sequences"]
    if isinstance(doc, dict):
        return motion_from_dict(doc)
    if not isinstance(doc, list) or not doc:
        raise MotionFormatError(f"{path}: pool must be a motion document or a non-empty list of them")
    parts = [motion_from_dict(d) for d in doc]
    skel = parts[0][1]
    frames = []
    for seq, s in parts:
        if s.n_dof != skel.n_dof or s.n_bodies != skel.n_bodies:
            raise MotionFormatError(f"{path}: pool entries use different skeletons")
        frames += seq.frames
    return PoseSequence.from_frames(frames, parts[0][0].fps, skel.name), skel
