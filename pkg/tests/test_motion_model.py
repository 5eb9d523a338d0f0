import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from helpers import IDENT, crouch_joints, humanoid, jump_motion, sequence
from motion_forge import rotations
from motion_forge.motion_model import (
    Body,
    Frame,
    PoseSequence,
    SkeletonMismatchError,
    SkeletonSpec,
    finite_difference_velocities,
    forward_kinematics,
    forward_kinematics_all,
    min_body_height,
    min_body_heights,
    with_root_heights,
)


def homogeneous_fk(root_pos, root_quat, joints, skel):
    """Oracle: chain 4x4 transforms body by body."""
    w, x, y, z = root_quat
    root = np.eye(4)
    root[:3, :3] = Rotation.from_quat([x, y, z, w]).as_matrix()
    root[:3, 3] = root_pos
    dof_of = {b: k for k, b in enumerate(skel.dof_map)}
    world = []
    for i, body in enumerate(skel.bodies):
        local = np.eye(4)
        local[:3, 3] = body.offset
        if body.axis is not None:
            local[:3, :3] = Rotation.from_rotvec(np.asarray(body.axis) * joints[dof_of[i]]).as_matrix()
        parent = root if body.parent is None else world[body.parent]
        world.append(parent @ local)
    return np.array([m[:3, 3] for m in world]), np.array([m[:3, :3] for m in world])


def random_pose(rng, skel):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return rng.normal(size=3), q, rng.uniform(-1.5, 1.5, skel.n_dof)


def test_fk_matches_homogeneous_oracle(skel, rng):
    for _ in range(50):
        p, q, th = random_pose(rng, skel)
        seq = PoseSequence(30.0, p[None], q[None], th[None])
        got = forward_kinematics(seq, skel, 0)
        pos, rot = homogeneous_fk(p, q, th, skel)
        np.testing.assert_allclose(got.positions, pos, atol=1e-12)
        np.testing.assert_allclose(got.rotations, rot, atol=1e-12)


def test_standing_pose_feet_on_ground(skel):
    seq = sequence([0.9], np.zeros((1, 6)))
    pos = forward_kinematics(seq, skel, 0).positions
    np.testing.assert_allclose(pos[list(skel.body_set("feet")), 2], 0.0, atol=1e-15)
    assert min_body_height(seq, skel, 0) == pytest.approx(0.0, abs=1e-15)


def test_crouch_keeps_feet_flat(skel):
    bend = np.array([0.0, 0.3, 0.6])
    seq = sequence(0.1 + 0.8 * np.cos(bend), crouch_joints(bend))
    np.testing.assert_allclose(min_body_heights(seq, skel), 0.0, atol=1e-12)


def test_min_height_brute_force(skel, rng):
    seq = jump_motion(60, 1, rng)
    expected = []
    for t in range(len(seq)):
        pos, _ = homogeneous_fk(seq.root_pos[t], seq.root_quat[t], seq.joint_pos[t], skel)
        expected.append(min(pos[i, 2] + skel.bodies[i].z_offset for i in range(skel.n_bodies)))
    np.testing.assert_allclose(min_body_heights(seq, skel), expected, atol=1e-12)


def test_z_offset_lowers_body():
    s = SkeletonSpec((Body("root", None, z_offset=-0.25),))
    seq = PoseSequence(10.0, [[0, 0, 1.0]], [IDENT], np.zeros((1, 0)))
    assert min_body_height(seq, s, 0) == pytest.approx(0.75)


def test_fk_batched_matches_single(skel, rng):
    seq = jump_motion(40, 1, rng)
    pos, rot = forward_kinematics_all(seq, skel)
    for t in (0, 17, 39):
        single = forward_kinematics(seq, skel, t)
        np.testing.assert_array_equal(pos[t], single.positions)
        np.testing.assert_array_equal(rot[t], single.rotations)


def test_fk_index_and_mismatch(skel):
    seq = sequence([0.9, 0.9], np.zeros((2, 6)))
    with pytest.raises(IndexError):
        forward_kinematics(seq, skel, 2)
    bad = PoseSequence(30.0, [[0, 0, 1]], [IDENT], np.zeros((1, 4)))
    with pytest.raises(SkeletonMismatchError):
        forward_kinematics(bad, skel, 0)


def test_stale_body_cache_warns(skel, caplog):
    seq = sequence([0.9], np.zeros((1, 6)))
    pos = forward_kinematics(seq, skel, 0).positions
    stale = seq.replace(body_pos=(pos + 0.1)[None])
    with caplog.at_level(logging.WARNING):
        out = forward_kinematics(stale, skel, 0)
    assert out.cache_stale
    np.testing.assert_allclose(out.positions, pos)
    assert not forward_kinematics(seq.replace(body_pos=pos[None]), skel, 0).cache_stale


def test_skeleton_validation():
    with pytest.raises(ValueError):
        SkeletonSpec((Body("a", None), Body("b", None)))
    with pytest.raises(ValueError):
        SkeletonSpec((Body("a", None), Body("b", 2), Body("c", 1)))
    with pytest.raises(ValueError):
        SkeletonSpec((Body("a", None), Body("b", 0, axis=(0, 0, 2.0))))
    with pytest.raises(ValueError):
        SkeletonSpec((Body("a", None), Body("b", 0, axis=(0, 0, 1.0))), joint_limits=[(1.0, -1.0)])
    with pytest.raises(ValueError):
        SkeletonSpec((Body("a", None),), body_sets={"feet": (3,)})


def test_skeleton_helpers(skel):
    assert skel.n_bodies == 12 and skel.n_dof == 6
    assert skel.joints_of("knees") == [1, 4]
    assert skel.joints_of("ankles") == [2, 5]
    assert skel.body_index("l_foot") == 7
    assert skel.joint_names[0] == "l_hip"
    assert not skel.joint_limits.flags.writeable


def test_sequence_validation():
    with pytest.raises(ValueError):
        PoseSequence(0.0, [[0, 0, 1]], [IDENT], np.zeros((1, 0)))
    with pytest.raises(ValueError):
        PoseSequence(30.0, np.zeros((0, 3)), np.zeros((0, 4)), np.zeros((0, 0)))
    with pytest.raises(ValueError):
        PoseSequence(30.0, [[0, 0, 1]], [[1.0, 0.1, 0, 0]], np.zeros((1, 0)))
    with pytest.raises(ValueError):
        PoseSequence(30.0, [[0, 0, 1], [0, 0, 1]], [IDENT], np.zeros((2, 0)))


def test_sequence_is_immutable():
    seq = sequence([1.0, 1.1], np.zeros((2, 6)))
    with pytest.raises(ValueError):
        seq.root_pos[0, 2] = 5.0
    moved = with_root_heights(seq, [2.0, 3.0])
    assert seq.root_pos[0, 2] == 1.0
    np.testing.assert_array_equal(moved.root_pos[:, 2], [2.0, 3.0])


def test_frames_round_trip():
    seq = sequence([1.0, 1.1, 1.3], crouch_joints([0.1, 0.2, 0.3]))
    frames = seq.frames
    assert isinstance(frames[1], Frame)
    back = PoseSequence.from_frames(frames, seq.fps, seq.skeleton_id)
    np.testing.assert_array_equal(back.joint_pos, seq.joint_pos)
    np.testing.assert_array_equal(back.root_pos, seq.root_pos)


def loop_velocities(seq):
    n = len(seq)
    j = np.zeros_like(seq.joint_pos)
    v = np.zeros_like(seq.root_pos)
    w = np.zeros_like(seq.root_pos)
    for t in range(n - 1):
        j[t] = seq.joint_pos[t + 1] - seq.joint_pos[t]
        v[t] = seq.root_pos[t + 1] - seq.root_pos[t]
        r = Rotation.from_quat(np.roll(seq.root_quat[t + 1], -1)) * Rotation.from_quat(np.roll(seq.root_quat[t], -1)).inv()
        w[t] = r.as_rotvec()
    j[-1], v[-1], w[-1] = j[-2], v[-2], w[-2]
    return j, v, w


def test_finite_differences_match_loop(rng):
    n = 25
    axis = rng.normal(size=(n, 3))
    axis /= np.linalg.norm(axis, axis=1, keepdims=True)
    quat = rotations.from_axis_angle(axis, rng.uniform(0, 0.5, n).cumsum())
    seq = PoseSequence(30.0, rng.normal(size=(n, 3)), quat, rng.normal(size=(n, 4)))
    vel = finite_difference_velocities(seq)
    j, v, w = loop_velocities(seq)
    np.testing.assert_allclose(vel.joint, j, atol=1e-12)
    np.testing.assert_allclose(vel.linear, v, atol=1e-12)
    np.testing.assert_allclose(vel.angular, w, atol=1e-9)
    per_s = finite_difference_velocities(seq, per_second=True)
    np.testing.assert_allclose(per_s.angular, vel.angular * 30.0)
    np.testing.assert_allclose(per_s.joint, vel.joint * 30.0)


def test_finite_difference_needs_two_frames():
    with pytest.raises(ValueError):
        finite_difference_velocities(sequence([1.0], np.zeros((1, 6))))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6), st.floats(-3, 3))
def test_fk_root_height_shift(th, dz):
    """Raising the root moves every body up by the same amount."""
    skel = humanoid()
    th = np.array(th)
    a = sequence([1.0], th[None])
    b = sequence([1.0 + dz], th[None])
    np.testing.assert_allclose(
        forward_kinematics(b, skel, 0).positions - forward_kinematics(a, skel, 0).positions,
        np.tile([0, 0, dz], (skel.n_bodies, 1)), atol=1e-12,
    )
