"""Root height drift correction with parabolic jump reconstruction.

The corrected root height is built in four passes over the root z track P:

1. the first frame is aligned so that its lowest body touches the ground;
2. local minima of P are treated as ground contacts and aligned the same
   way, while every other frame inherits the previous corrected height plus
   the raw upward step P(t) - P(t-1) when that step exceeds a threshold;
3. each local maximum starts a ballistic segment that ends at the next
   minimum; the frames in between are replaced by samples of a free-fall
   parabola with zero vertical velocity at the apex;
4. any frame still below ground is re-aligned to ground contact.

Only the root z coordinate changes. Because the lowest body point moves
rigidly with the root in z, the lowest point of a corrected frame is
``z_min(q_t) + (P_hat(t) - P(t))`` and forward kinematics is evaluated once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .motion_model import PoseSequence, SkeletonSpec, min_body_heights, with_root_heights

log = logging.getLogger(__name__)

STANDARD_GRAVITY = 9.81
# float slack when testing "below ground"; far under any physical scale
GROUND_EPS = 1e-12


@dataclass(frozen=True)
class CorrectionConfig:
    gravity: float = STANDARD_GRAVITY
    # True: ``gravity`` is m/s^2 and is converted with fps; False: m/frame^2
    gravity_per_second: bool = True
    velocity_threshold: float = 1e-3   # m/frame
    plateau_tolerance: float = 1e-4    # m
    skip_set: frozenset[int] = frozenset()
    # maxima less prominent than this are skipped automatically; 0 disables
    min_jump_prominence: float = 0.02  # m

    def __post_init__(self):
        if not self.gravity > 0:
            raise ValueError("gravity must be positive")
        if self.velocity_threshold < 0:
            raise ValueError("velocity_threshold must be non-negative")
        if self.plateau_tolerance < 0:
            raise ValueError("plateau_tolerance must be non-negative")
        if self.min_jump_prominence < 0:
            raise ValueError("min_jump_prominence must be non-negative")
        object.__setattr__(self, "skip_set", frozenset(int(i) for i in self.skip_set))

    def gravity_per_frame(self, fps: float) -> float:
        return self.gravity / fps**2 if self.gravity_per_second else self.gravity


@dataclass(frozen=True)
class ExtremaSet:
    maxima: tuple[int, ...]
    minima: tuple[int, ...]
    skip_set: frozenset[int] = frozenset()


def plateau_runs(values: np.ndarray, tol: float) -> list[tuple[int, int]]:
    """Split a series into runs of samples within ``tol`` of the run's first sample.

    Returns inclusive (start, end) pairs covering every index.
    """
    runs = []
    start = 0
    for i in range(1, len(values)):
        if abs(values[i] - values[start]) > tol:
            runs.append((start, i - 1))
            start = i
    runs.append((start, len(values) - 1))
    return runs


def local_extrema(values, tol: float = 0.0) -> tuple[list[int], list[int]]:
    """Strict discrete maxima and minima after merging plateaus.

    A plateau is represented by its midpoint frame. Runs touching either end
    of the series are never extrema.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 3:
        raise ValueError("extrema detection needs a 1-D series of at least 3 frames")
    runs = plateau_runs(values, tol)
    maxima, minima = [], []
    for k in range(1, len(runs) - 1):
        start, end = runs[k]
        here = values[start]
        before = values[runs[k - 1][0]]
        after = values[runs[k + 1][0]]
        if here > before and here > after:
            maxima.append((start + end) // 2)
        elif here < before and here < after:
            minima.append((start + end) // 2)
    return maxima, minima


def jump_prominence(heights: np.ndarray, peak: int, minima: list[int]) -> float:
    """Height of ``peak`` above the higher of its neighbouring minima.

    A side without a minimum falls back to the lowest sample on that side.
    """
    before = [m for m in minima if m < peak]
    after = [m for m in minima if m > peak]
    left = heights[before[-1]] if before else np.min(heights[: peak + 1])
    right = heights[after[0]] if after else np.min(heights[peak:])
    return float(heights[peak] - max(left, right))


def detect_extrema(heights, cfg: CorrectionConfig | None = None) -> ExtremaSet:
    cfg = cfg or CorrectionConfig()
    heights = np.asarray(heights, dtype=float)
    maxima, minima = local_extrema(heights, cfg.plateau_tolerance)

    runs = plateau_runs(heights, cfg.plateau_tolerance)
    run_of = np.empty(len(heights), dtype=int)
    for k, (s, e) in enumerate(runs):
        run_of[s : e + 1] = k
    manual_runs = {run_of[i] for i in cfg.skip_set if 0 <= i < len(heights)}

    kept, skipped = [], set()
    for m in maxima:
        if run_of[m] in manual_runs:
            skipped.add(m)
        elif cfg.min_jump_prominence > 0 and jump_prominence(heights, m, minima) < cfg.min_jump_prominence:
            log.debug("maximum at frame %d below prominence threshold, skipped", m)
            skipped.add(m)
        else:
            kept.append(m)
    return ExtremaSet(tuple(kept), tuple(minima), frozenset(skipped | set(cfg.skip_set)))


@dataclass(frozen=True)
class JumpSegment:
    start: int            # apex frame t_s
    end: int              # landing frame t_e
    flight_frames: float  # T in frames
    flight_time: float    # T in seconds
    interior: int         # N


@dataclass
class CorrectionReport:
    original_heights: np.ndarray
    corrected_heights: np.ndarray
    contact_frames: list[int] = field(default_factory=list)
    jump_segments: list[JumpSegment] = field(default_factory=list)
    penetration_fixes: list[int] = field(default_factory=list)
    flags: list[dict] = field(default_factory=list)
    extrema: ExtremaSet | None = None

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def to_dict(self) -> dict:
        ext = self.extrema
        return {
            "original_heights": self.original_heights.tolist(),
            "corrected_heights": self.corrected_heights.tolist(),
            "contact_frames": list(self.contact_frames),
            "jump_segments": [asdict(s) for s in self.jump_segments],
            "penetration_fixes": list(self.penetration_fixes),
            "flags": list(self.flags),
            "extrema": None if ext is None else {
                "maxima": list(ext.maxima),
                "minima": list(ext.minima),
                "skip_set": sorted(ext.skip_set),
            },
        }


def correct_root_height(
    seq: PoseSequence, skel: SkeletonSpec, cfg: CorrectionConfig | None = None
) -> tuple[PoseSequence, CorrectionReport]:
    cfg = cfg or CorrectionConfig()
    n = len(seq)
    if n < 3:
        raise ValueError("height correction needs at least 3 frames")
    P = np.array(seq.root_pos[:, 2])
    z_min = min_body_heights(seq, skel)
    ground = P - z_min  # root height that puts the lowest body on the ground
    step = np.empty(n)
    step[:-1] = P[1:] - P[:-1]
    step[-1] = step[-2]
    g = cfg.gravity_per_frame(seq.fps)

    extrema = detect_extrema(P, cfg)
    minima = set(extrema.minima)
    report = CorrectionReport(original_heights=P.copy(), corrected_heights=P, extrema=extrema)

    P_hat = np.empty(n)
    P_hat[0] = ground[0]
    for t in range(1, n):
        if t in minima:
            candidate = ground[t]
            if z_min[t] + (candidate - P[t]) >= -GROUND_EPS:
                P_hat[t] = candidate
                report.contact_frames.append(t)
                continue
        P_hat[t] = P_hat[t - 1] + (step[t - 1] if step[t - 1] > cfg.velocity_threshold else 0.0)

    sorted_minima = sorted(minima)
    for t_s in extrema.maxima:
        t_e = next((m for m in sorted_minima if m > t_s), None)
        if t_e is None:
            log.warning("maximum at frame %d has no following minimum; left as propagated", t_s)
            report.flags.append({"kind": "no_landing", "frame": t_s})
            continue
        y0, y1 = P_hat[t_s], P_hat[t_e]
        if y0 < y1:
            log.warning("jump %d-%d lands above its apex; flight time undefined, skipped", t_s, t_e)
            report.flags.append({"kind": "imaginary_flight", "frame": t_s, "landing": t_e})
            continue
        N = t_e - t_s - 1
        T = math.sqrt(2.0 * (y0 - y1) / g)
        for k in range(1, N + 1):
            dt = k / (N + 1) * T
            P_hat[t_s + k] = y0 - 0.5 * g * dt * dt
        report.jump_segments.append(JumpSegment(t_s, t_e, T, T / seq.fps, N))

    for t in range(n):
        if z_min[t] + (P_hat[t] - P[t]) < -GROUND_EPS:
            P_hat[t] = ground[t]
            report.penetration_fixes.append(t)

    report.corrected_heights = P_hat
    return with_root_heights(seq, P_hat), report
