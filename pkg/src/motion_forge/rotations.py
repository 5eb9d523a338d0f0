"""Quaternion helpers.

All quaternions are stored (w, x, y, z). Every function accepts a single
quaternion of shape (4,) or a batch of shape (..., 4).
"""

from __future__ import annotations

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a ⊗ b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def from_axis_angle(axis: np.ndarray, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    half = 0.5 * np.asarray(angle, dtype=float)[..., None]
    return np.concatenate([np.cos(half), np.sin(half) * axis], axis=-1)


def to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a unit quaternion, shape (..., 3, 3)."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    m = np.stack(
        [
            1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
            2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y),
        ],
        axis=-1,
    )
    return m.reshape(q.shape[:-1] + (3, 3))


def from_matrix(m: np.ndarray) -> np.ndarray:
    """Unit quaternion (w >= 0) of a rotation matrix, shape (..., 4)."""
    from scipy.spatial.transform import Rotation

    m = np.asarray(m, dtype=float)
    flat = m.reshape(-1, 3, 3)
    xyzw = Rotation.from_matrix(flat).as_quat()
    q = np.concatenate([xyzw[:, 3:], xyzw[:, :3]], axis=-1)
    q = np.where(q[:, :1] < 0, -q, q)
    return q.reshape(m.shape[:-2] + (4,))


def rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", to_matrix(q), np.asarray(v, dtype=float))


def log_map(q: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a unit quaternion along the shortest path.

    The sign is canonicalized to w >= 0 first, so the returned angle is
    at most pi.
    """
    q = np.asarray(q, dtype=float)
    q = np.where(q[..., :1] < 0, -q, q)
    w = np.clip(q[..., 0], -1.0, 1.0)
    v = q[..., 1:]
    s = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(s, w)
    # angle/s -> 2 as s -> 0; use the series to stay finite
    safe = s > 1e-12
    scale = np.where(safe, angle / np.where(safe, s, 1.0), 2.0 / np.maximum(w, 1e-300))
    return v * scale[..., None]


def quat_error(q1: np.ndarray, q2: np.ndarray, tol: float = 1e-4) -> np.ndarray:
    """Rotation vector taking q2 to q1, i.e. log(q1 ⊗ conj(q2)).

    Raises ValueError if either input is off the unit sphere by more than
    ``tol``.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    for q in (q1, q2):
        if np.any(np.abs(np.linalg.norm(q, axis=-1) - 1.0) > tol):
            raise ValueError("quat_error expects unit quaternions")
    return log_map(multiply(q1, conjugate(q2)))


def projected_gravity(q: np.ndarray, gravity=(0.0, 0.0, -1.0)) -> np.ndarray:
    """World gravity direction expressed in the body frame, R^T g."""
    r = to_matrix(q)
    return np.einsum("...ji,j->...i", r, np.asarray(gravity, dtype=float))
