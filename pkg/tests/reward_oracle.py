"""Second, loop-based implementation of every reward term, used as an oracle.

Rotations go through scipy (x, y, z, w order) rather than the package's own
quaternion helpers.
"""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from motion_forge.tracking import BodyState, TrackingPair


def _rot(q):
    return Rotation.from_quat([q[1], q[2], q[3], q[0]])


def _joints(skel, group):
    bodies = set(skel.body_set(group))
    return [j for j, b in enumerate(skel.dof_map) if b in bodies]


def _com(state, skel):
    m = [b.mass for b in skel.bodies]
    return [sum(m[i] * state.body_pos[i][k] for i in range(len(m))) / sum(m) for k in range(3)]


def _rel_pos(state, i):
    return _rot(state.root_quat).inv().apply(np.asarray(state.body_pos[i]) - state.root_pos)


def _rel_rot(state, i):
    return _rot(state.root_quat).inv() * _rot(state.body_quat[i])


def _sq(v):
    return sum(float(x) ** 2 for x in v)


def oracle_terms(pair: TrackingPair, cfg) -> dict:
    skel, rob, ref = pair.skeleton, pair.robot, pair.reference
    B = skel.n_bodies
    feet = list(skel.body_set("feet"))
    out = {}

    err = sum(_sq(_rel_pos(ref, i) - _rel_pos(rob, i)) for i in range(B)) / B
    out["body_pos"] = math.exp(-err / cfg.sigma_pos2)
    err = sum(_sq((_rel_rot(ref, i) * _rel_rot(rob, i).inv()).as_rotvec()) for i in range(B)) / B
    out["body_ori"] = math.exp(-err / cfg.sigma_ori2)
    err = sum(_sq(ref.body_ang_vel[i] - rob.body_ang_vel[i]) for i in range(B)) / B
    out["body_ang_vel"] = math.exp(-err / cfg.sigma_ang_vel2)

    soles = {f: rob.body_pos[f][2] + skel.bodies[f].z_offset for f in feet}
    low = min(feet, key=lambda f: soles[f])
    com = _com(rob, skel)
    dist = math.hypot(com[0] - rob.body_pos[low][0], com[1] - rob.body_pos[low][1])
    grounded = [f for f in feet if ref.body_pos[f][2] + skel.bodies[f].z_offset < cfg.single_support_height]
    out["com"] = math.exp(-dist / cfg.sigma_com2) * (1.0 if len(grounded) == 1 else 0.0)

    sep = math.sqrt(_sq(rob.body_pos[feet[0]] - rob.body_pos[feet[1]]))
    out["close_feet"] = max(0.0, cfg.close_feet_distance - sep)

    slip = 0.0
    for f in feet:
        if rob.contact_force[f] > cfg.slip_force_threshold:
            slip += math.sqrt(math.hypot(rob.body_lin_vel[f][0], rob.body_lin_vel[f][1]))
    out["feet_slip"] = slip

    out["root_ori"] = _sq((_rot(ref.root_quat) * _rot(rob.root_quat).inv()).as_rotvec())

    for name, group in (("action_rate_knee", "knees"), ("action_rate_ankle", "ankles")):
        out[name] = sum((pair.action[j] - pair.previous_action[j]) ** 2 for j in _joints(skel, group))

    lim = 0.0
    for j, q in enumerate(rob.joint_pos):
        lo, hi = skel.joint_limits[j]
        lim += max(q - hi, 0.0) + max(lo - q, 0.0)
    out["dof_limits"] = lim

    out["undesired_contacts"] = float(sum(
        1 for i in skel.body_set("undesired_contact_bodies") if rob.contact_force[i] > cfg.undesired_force_threshold
    ))

    sh = list(skel.body_set("shoulders"))
    out["shoulder_height"] = sum((ref.body_pos[i][2] - rob.body_pos[i][2]) ** 2 for i in sh)
    gap = abs(sum(ref.body_pos[i][2] for i in sh) / len(sh) - sum(rob.body_pos[i][2] for i in sh) / len(sh))
    gate = 1.0 if gap > cfg.gate_threshold else 0.0
    out["xy_move_before_stand"] = gate * math.hypot(com[0] - pair.previous_com_xy[0], com[1] - pair.previous_com_xy[1])
    out["action_rate_before_stand"] = gate * sum(
        (a - b) ** 2 for a, b in zip(pair.action, pair.previous_action)
    )
    return out


def random_unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_state(rng, skel, near=None, scale=0.3):
    """Arbitrary body kinematics; ``near`` perturbs another state instead."""
    B, D = skel.n_bodies, skel.n_dof
    if near is None:
        root_pos = rng.normal(size=3)
        root_quat = random_unit_quats(rng, 1)[0]
        body_pos = rng.normal(size=(B, 3))
        body_pos[:, 2] = np.abs(body_pos[:, 2])
        body_quat = random_unit_quats(rng, B)
        joint_pos = rng.uniform(-3, 3, D)
        lin = rng.normal(size=(B, 3))
        ang = rng.normal(size=(B, 3))
    else:
        def jitter(q):
            q = q + rng.normal(0, scale, q.shape)
            return q / np.linalg.norm(q, axis=-1, keepdims=True)

        root_pos = near.root_pos + rng.normal(0, scale, 3)
        root_quat = jitter(near.root_quat)
        body_pos = near.body_pos + rng.normal(0, scale, (B, 3))
        body_quat = jitter(near.body_quat)
        joint_pos = near.joint_pos + rng.normal(0, scale, D)
        lin = near.body_lin_vel + rng.normal(0, scale, (B, 3))
        ang = near.body_ang_vel + rng.normal(0, scale, (B, 3))
    feet = list(skel.body_set("feet"))
    # often put one or both feet near the ground so the support indicator varies
    for f in feet:
        if rng.random() < 0.5:
            body_pos[f, 2] = rng.uniform(0, 0.03)
    force = rng.uniform(0, 16, B)
    return BodyState(root_pos, root_quat, joint_pos, body_pos, body_quat, lin, ang, force)


def random_pair(rng, skel):
    ref = random_state(rng, skel)
    rob = random_state(rng, skel, near=ref, scale=rng.choice([0.05, 0.3, 1.0]))
    body = rob.body_pos
    if rng.random() < 0.4:
        l, r = skel.body_set("feet")
        body[r] = body[l] + rng.normal(0, 0.08, 3)
    if rng.random() < 0.4:
        # fallen robot: shoulders far below the reference
        for i in skel.body_set("shoulders"):
            body[i, 2] = ref.body_pos[i, 2] - rng.uniform(0.8, 1.6)
    D = skel.n_dof
    action = rng.normal(size=D)
    return TrackingPair(rob, ref, skel, action=action, previous_action=action + rng.normal(0, 0.2, D),
                        previous_com_xy=rng.normal(size=2))
