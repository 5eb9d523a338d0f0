"""Correction, smoothing, analysis and scoring of retargeted humanoid motion."""

from .motion_model import (
    Body,
    Frame,
    PoseSequence,
    SkeletonSpec,
    finite_difference_velocities,
    forward_kinematics,
    min_body_height,
    min_body_heights,
)
from .height_correction import CorrectionConfig, CorrectionReport, correct_root_height, detect_extrema
from .smoothing import SGConfig, sg_filter, smooth_sequence
from .stats import DatasetStats, compute_stats
from .sampling import AnchorSampler, detect_anchors, kinetic_energy_proxy
from .rewards import RewardConfig, eval_recovery_rewards, eval_tracking_rewards, recovery_indicator
from .termination import TerminationConfig, TerminationState, eval_bad_tracking, step_termination
from .augment import PosePool, recombine

__version__ = "0.1.0"

__all__ = [
    "Body", "Frame", "PoseSequence", "SkeletonSpec", "finite_difference_velocities", "forward_kinematics",
    "min_body_height", "min_body_heights",
    "CorrectionConfig", "CorrectionReport", "correct_root_height", "detect_extrema",
    "SGConfig", "sg_filter", "smooth_sequence",
    "DatasetStats", "compute_stats",
    "AnchorSampler", "detect_anchors", "kinetic_energy_proxy",
    "RewardConfig", "eval_recovery_rewards", "eval_tracking_rewards", "recovery_indicator",
    "TerminationConfig", "TerminationState", "eval_bad_tracking", "step_termination",
    "PosePool", "recombine",
]
