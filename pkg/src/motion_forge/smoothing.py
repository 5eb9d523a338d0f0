"""Savitzky-Golay smoothing of root positions and joint angles.

Interior samples use precomputed convolution weights for the centre of a
least-squares polynomial fit over a symmetric window. The first and last
``w // 2`` samples are taken from a single polynomial fitted to the first
(or last) ``w`` samples, evaluated at each boundary sample, so no samples
are invented beyond the clip ends.

Root quaternions are never filtered: component-wise smoothing would take
them off the unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .motion_model import PoseSequence

ROOT_CHANNELS = ("root_x", "root_y", "root_z")


@dataclass(frozen=True)
class SGConfig:
    poly_order: int = 3
    window_length: int | str = "adaptive"
    adaptive_fraction: float = 0.1
    min_window: int = 5

    def __post_init__(self):
        if self.poly_order < 0:
            raise ValueError("poly_order must be non-negative")
        if isinstance(self.window_length, str):
            if self.window_length != "adaptive":
                raise ValueError(f"window_length must be an odd integer or 'adaptive', got {self.window_length!r}")
        else:
            w = int(self.window_length)
            if w % 2 == 0 or w <= 0:
                raise ValueError(f"window_length must be odd and positive, got {w}")
            if w <= self.poly_order:
                raise ValueError(f"window_length {w} must exceed poly_order {self.poly_order}")
        if not 0 < self.adaptive_fraction <= 1:
            raise ValueError("adaptive_fraction must be in (0, 1]")

    def window_for(self, n: int) -> int:
        """Concrete window length for a series of ``n`` samples."""
        if self.window_length != "adaptive":
            w = int(self.window_length)
            if w > n:
                raise ValueError(f"series of {n} samples is shorter than window {w}")
            return w
        w = int(round(n * self.adaptive_fraction))
        w = max(w, self.min_window, self.poly_order + 1)
        if w % 2 == 0:
            w += 1
        if w > n:
            w = n if n % 2 else n - 1
        if w <= self.poly_order:
            raise ValueError(f"series of {n} samples too short for polynomial order {self.poly_order}")
        return w


def _fit_matrix(positions: np.ndarray, order: int) -> np.ndarray:
    """Pseudo-inverse of the Vandermonde matrix for sample ``positions``.

    Row k maps window samples to the k-th polynomial coefficient.
    """
    vander = np.vander(positions, order + 1, increasing=True)
    return np.linalg.pinv(vander)


def sg_coefficients(window: int, order: int) -> np.ndarray:
    """Convolution weights giving the fitted value at the window centre."""
    half = window // 2
    return _fit_matrix(np.arange(-half, half + 1, dtype=float), order)[0]


def sg_filter(series, cfg: SGConfig | None = None) -> np.ndarray:
    cfg = cfg or SGConfig()
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("sg_filter works on one channel at a time")
    n = len(x)
    w = cfg.window_for(n)
    p = cfg.poly_order
    half = w // 2

    # Filtering deviations from a reference sample keeps constant input
    # bit-exact, since the weights only sum to one up to rounding.
    out = np.empty(n)
    weights = sg_coefficients(w, p)
    centre = x[half : n - half]
    acc = np.zeros(n - 2 * half)
    for j in range(w):
        acc += weights[j] * (x[j : j + n - 2 * half] - centre)
    out[half : n - half] = centre + acc

    if half:
        pos = np.arange(w, dtype=float)
        fit = _fit_matrix(pos, p)
        head_ref, tail_ref = x[0], x[n - 1]
        out[:half] = head_ref + np.vander(pos[:half], p + 1, increasing=True) @ (fit @ (x[:w] - head_ref))
        out[n - half :] = tail_ref + np.vander(pos[w - half :], p + 1, increasing=True) @ (
            fit @ (x[n - w :] - tail_ref)
        )
    return out


def _resolve_channels(channels, n_dof: int) -> tuple[list[int], list[int]]:
    if isinstance(channels, str):
        channels = {
            "all": list(ROOT_CHANNELS) + [f"joint_{j}" for j in range(n_dof)],
            "root": list(ROOT_CHANNELS),
            "joints": [f"joint_{j}" for j in range(n_dof)],
        }.get(channels, [channels])
    root_idx, joint_idx = [], []
    for name in channels:
        if name in ROOT_CHANNELS:
            root_idx.append(ROOT_CHANNELS.index(name))
        elif name.startswith("joint_") and name[6:].isdigit() and int(name[6:]) < n_dof:
            joint_idx.append(int(name[6:]))
        else:
            raise ValueError(f"unknown channel {name!r}")
    return sorted(set(root_idx)), sorted(set(joint_idx))


def smooth_sequence(seq: PoseSequence, cfg: SGConfig | None = None, channels: str | Iterable[str] = "all") -> PoseSequence:
    """Filter the selected root position and joint channels independently.

    ``channels`` is "all", "root", "joints" or an iterable of names such as
    ``"root_z"`` or ``"joint_4"``.
    """
    cfg = cfg or SGConfig()
    root_idx, joint_idx = _resolve_channels(channels, seq.n_dof)
    root = np.array(seq.root_pos)
    joints = np.array(seq.joint_pos)
    for c in root_idx:
        root[:, c] = sg_filter(root[:, c], cfg)
    for j in joint_idx:
        joints[:, j] = sg_filter(joints[:, j], cfg)
    changes = {"root_pos": root, "joint_pos": joints, "body_pos": None}
    if joint_idx:
        changes["joint_vel"] = None
    return seq.replace(**changes)
