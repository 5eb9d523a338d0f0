"""Low-kinetic-energy anchors and failure-adaptive start-frame sampling.

Episodes start only at anchor frames, the local minima of the summed
absolute joint velocity. A failure at reference frame t_f bumps the weight
of the latest anchor at or before t_f; anchors are then drawn in proportion
to their weights.

The sampler owns a numpy ``PCG64`` generator whose full state is part of
the serialized sampler, so a restored sampler continues the same stream.
"""

from __future__ import annotations

import bisect
from typing import Iterable

import numpy as np

from .height_correction import local_extrema
from .motion_model import PoseSequence, forward_difference

RNG_ALGORITHM = "PCG64"


def kinetic_energy_proxy(seq: PoseSequence, use_stored_velocity: bool = True) -> np.ndarray:
    """Per-frame sum of absolute joint velocities.

    Uses the sequence's own joint_vel when present, otherwise raw per-frame
    forward differences of joint_pos.
    """
    if use_stored_velocity and seq.joint_vel is not None:
        vel = seq.joint_vel
    else:
        vel = forward_difference(seq.joint_pos)
    return np.abs(vel).sum(axis=1)


def detect_anchors(energy, plateau_tolerance: float = 0.0) -> list[int]:
    """Frame 0 plus every local minimum of ``energy``."""
    _, minima = local_extrema(energy, plateau_tolerance)
    return sorted({0, *minima})


class AnchorSampler:
    """Categorical sampler over anchor frames with clipped additive weights.

    Not thread-safe: ``record_failure`` and ``sample_anchor`` mutate the
    weights and the generator.
    """

    def __init__(
        self,
        anchors: Iterable[int],
        alpha: float = 0.5,
        w_min: float = 1.0,
        w_max: float = 10.0,
        rng_seed: int | None = 0,
        weights: Iterable[float] | None = None,
    ):
        anchors = [int(a) for a in anchors]
        if not anchors:
            raise ValueError("need at least one anchor")
        if anchors != sorted(set(anchors)) or anchors[0] < 0:
            raise ValueError("anchors must be sorted, unique and non-negative")
        if not 0 <= w_min <= w_max:
            raise ValueError("need 0 <= w_min <= w_max")
        self.anchors = anchors
        self.alpha = float(alpha)
        self.w_min = float(w_min)
        self.w_max = float(w_max)
        if weights is None:
            # initial weight 1, clipped in case the bounds exclude it
            weights = np.full(len(anchors), min(max(1.0, self.w_min), self.w_max))
        self.weights = np.array(weights, dtype=float)
        if self.weights.shape != (len(anchors),):
            raise ValueError("one weight per anchor required")
        if np.any(self.weights < self.w_min) or np.any(self.weights > self.w_max):
            raise ValueError("weights outside [w_min, w_max]")
        self.rng_seed = rng_seed
        self.rng = np.random.Generator(np.random.PCG64(rng_seed))

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def anchor_index_for(self, t_f: int) -> int:
        k = bisect.bisect_right(self.anchors, int(t_f)) - 1
        if k < 0:
            raise ValueError(f"failure frame {t_f} precedes the first anchor {self.anchors[0]}")
        return k

    def record_failure(self, t_f: int) -> int:
        """Attribute a failure to the nearest preceding anchor; returns its index."""
        k = self.anchor_index_for(t_f)
        self.weights[k] = min(max(self.weights[k] + self.alpha, self.w_min), self.w_max)
        return k

    def sample_anchor(self) -> int:
        cdf = np.cumsum(self.weights)
        u = self.rng.random() * cdf[-1]
        k = min(int(np.searchsorted(cdf, u, side="right")), len(cdf) - 1)
        return self.anchors[k]

    def sample_many(self, n: int) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        u = self.rng.random(n) * cdf[-1]
        k = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        return np.asarray(self.anchors)[k]

    def to_dict(self) -> dict:
        return {
            "anchors": list(self.anchors),
            "weights": self.weights.tolist(),
            "alpha": self.alpha,
            "clip": [self.w_min, self.w_max],
            "rng_algorithm": RNG_ALGORITHM,
            "rng_seed": self.rng_seed,
            "rng_state": self.rng.bit_generator.state,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnchorSampler":
        algo = d.get("rng_algorithm", RNG_ALGORITHM)
        if algo != RNG_ALGORITHM:
            raise ValueError(f"unsupported rng algorithm {algo!r}")
        lo, hi = d["clip"]
        sampler = cls(d["anchors"], d["alpha"], lo, hi, d.get("rng_seed"), d["weights"])
        if d.get("rng_state") is not None:
            sampler.rng.bit_generator.state = d["rng_state"]
        return sampler


def sampler_for_sequence(seq: PoseSequence, **kwargs) -> AnchorSampler:
    return AnchorSampler(detect_anchors(kinetic_energy_proxy(seq)), **kwargs)


def record_failure(sampler: AnchorSampler, t_f: int) -> AnchorSampler:
    sampler.record_failure(t_f)
    return sampler


def sample_anchor(sampler: AnchorSampler) -> int:
    return sampler.sample_anchor()
