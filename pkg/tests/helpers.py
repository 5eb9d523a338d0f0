"""Skeletons and synthetic motion shared by the tests."""

from __future__ import annotations

import math

import numpy as np

from motion_forge.motion_model import Body, PoseSequence, SkeletonSpec

Y = (0.0, 1.0, 0.0)
G = 9.81
IDENT = np.array([1.0, 0.0, 0.0, 0.0])

# criterion number -> one-line PASS/FAIL summary, filled by the acceptance suite
ACCEPTANCE_RESULTS: dict[int, str] = {}


def humanoid() -> SkeletonSpec:
    """Pelvis, torso, two shoulders and two 3-joint pitch legs.

    Standing straight with the root at z = 0.9 puts both feet at z = 0.
    """
    bodies = [
        Body("pelvis", None),
        Body("torso", 0, (0.0, 0.0, 0.2)),
        Body("l_shoulder", 1, (0.0, 0.2, 0.3)),
        Body("r_shoulder", 1, (0.0, -0.2, 0.3)),
    ]
    for side, y in (("l", 0.1), ("r", -0.1)):
        base = len(bodies)
        bodies += [
            Body(f"{side}_hip", 0, (0.0, y, -0.05), Y),
            Body(f"{side}_knee", base, (0.0, 0.0, -0.4), Y),
            Body(f"{side}_ankle", base + 1, (0.0, 0.0, -0.4), Y),
            Body(f"{side}_foot", base + 2, (0.05, 0.0, -0.05)),
        ]
    limits = [(-2.0, 2.0), (-2.6, 0.1), (-1.0, 1.0)] * 2
    return SkeletonSpec(
        bodies=tuple(bodies),
        body_sets={
            "feet": (7, 11),
            "shoulders": (2, 3),
            "knees": (5, 9),
            "ankles": (6, 10),
            "undesired_contact_bodies": (0, 1, 2, 3),
        },
        joint_limits=limits,
        name="humanoid",
    )


def point_body(z_offset: float = 0.0) -> SkeletonSpec:
    return SkeletonSpec(bodies=(Body("root", None, z_offset=z_offset),), name="point")


def crouch_joints(bend: np.ndarray) -> np.ndarray:
    """Joint angles bending both legs by ``bend`` while keeping feet flat."""
    bend = np.asarray(bend, dtype=float)
    one = np.stack([bend, -2 * bend, bend], axis=-1)
    return np.concatenate([one, one], axis=-1)


def leg_height(bend) -> np.ndarray:
    """Root height that puts the feet on the ground for a given bend."""
    return 0.1 + 0.8 * np.cos(bend)


def sequence(root_z, joints, fps=50.0, xy=None, quat=None) -> PoseSequence:
    root_z = np.asarray(root_z, dtype=float)
    n = len(root_z)
    root = np.zeros((n, 3))
    if xy is not None:
        root[:, :2] = xy
    root[:, 2] = root_z
    q = np.tile(IDENT, (n, 1)) if quat is None else quat
    return PoseSequence(fps=fps, root_pos=root, root_quat=q, joint_pos=joints, skeleton_id="humanoid")


def jump_motion(n_frames: int, n_jumps: int, rng: np.random.Generator, fps: float = 50.0,
                drift: str = "float", noise: float = 0.0) -> PoseSequence:
    """Standing / crouching / jumping motion for the humanoid skeleton.

    The true motion is physically grounded; root height is then corrupted by
    a constant float, a constant penetration or a linear drift plus noise.
    """
    t = np.arange(n_frames)
    bend = 0.05 + 0.05 * np.sin(2 * np.pi * t / max(n_frames / 3, 10))
    flight = np.zeros(n_frames)
    centers = np.linspace(0, n_frames, n_jumps + 2)[1:-1].astype(int)
    for c in centers:
        apex = rng.uniform(0.15, 0.5)
        half = math.sqrt(2 * apex / G) * fps  # frames from take-off to apex
        h = int(half)
        crouch = 12
        for k in range(-h - crouch, h + crouch + 1):
            i = c + k
            if not 0 <= i < n_frames:
                continue
            if abs(k) <= h:
                flight[i] = max(flight[i], apex - 0.5 * G * (k / fps) ** 2)
            else:
                depth = abs(k) - h
                bend[i] += 0.5 * math.sin(math.pi * depth / (crouch + 1))
    root_z = leg_height(bend) + flight
    if drift == "float":
        root_z = root_z + rng.uniform(0.02, 0.2)
    elif drift == "penetrate":
        root_z = root_z - rng.uniform(0.02, 0.2)
    elif drift == "linear":
        root_z = root_z + np.linspace(0, rng.uniform(-0.3, 0.3), n_frames)
    if noise:
        root_z = root_z + rng.normal(0, noise, n_frames)
    return sequence(root_z, crouch_joints(bend), fps=fps)


def parabola_fixture(drop: float = 0.5):
    """Rigid point body: stand, rise, apex, fall into a landing dip, stand.

    The corrected apex sits exactly ``drop`` metres above the landing.
    """
    z = [1.0] * 10
    z += list(np.linspace(1.0, 1.0 + drop - 0.02, 21)[1:])  # frames 10..29
    z += [1.0 + drop]                                    # apex, frame 30
    z += list(np.linspace(1.0 + drop, 0.95, 21)[1:-1])   # frames 31..49
    z += [0.95]                                           # landing, frame 50
    z += list(np.linspace(0.95, 1.0, 6)[1:]) + [1.0] * 10
    z = np.array(z)
    skel = point_body(z_offset=-0.9)
    seq = PoseSequence(
        fps=50.0, root_pos=np.column_stack([np.zeros_like(z), np.zeros_like(z), z]),
        root_quat=np.tile(IDENT, (len(z), 1)), joint_pos=np.zeros((len(z), 0)), skeleton_id="point",
    )
    return seq, skel, 30, 50


def imaginary_flight_seq():
    """Tucked hop, then a landing minimum whose grounded height exceeds the apex."""
    n = 30
    bend = np.where(np.arange(n) < 20, 1.2, 0.0)
    base = float(leg_height(1.2))
    z = np.full(n, base)
    z[10:15] += [0.01, 0.03, 0.05, 0.03, 0.01]
    z[15:20] = np.linspace(base, base - 0.07, 5)
    z[20] = base - 0.09
    z[21:] = base - 0.04
    return sequence(z, crouch_joints(bend))


def ballistic_fixture(apex: float = 0.5, n: int = 120, fps: float = 50.0):
    """Rigid point body doing one ballistic jump with crouch dips either side."""
    g = G / fps**2
    half = math.sqrt(2 * apex / g)
    c = n // 2
    t = np.arange(n)
    z = np.full(n, 1.0)
    air = np.abs(t - c) <= half
    z[air] = 1.0 + apex - 0.5 * g * (t[air] - c) ** 2
    dip = [0.02, 0.04, 0.05, 0.04, 0.02]
    for k, d in enumerate(dip):
        z[c + int(half) + 1 + k] = 1.0 - d
        z[c - int(half) - 1 - k] = 1.0 - d
    seq = PoseSequence(
        fps=fps, root_pos=np.column_stack([np.zeros(n), np.zeros(n), z]),
        root_quat=np.tile(IDENT, (n, 1)), joint_pos=np.zeros((n, 0)), skeleton_id="point",
    )
    return seq, point_body(z_offset=-0.9)
