"""``motion-forge`` command line.

Exit codes: 0 success, 1 hard error, 2 completed with warnings (e.g. a jump
segment that could not be reconstructed). ``MOTION_FORGE_LOG`` sets the log
level (default WARNING).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from . import io
from .augment import PosePool, poses_to_sequence, recombine
from .config import ConfigError, PipelineConfig, load_config
from .height_correction import correct_root_height
from .pipeline import EXIT_ERROR, EXIT_OK, EXIT_WARNINGS, NoInputError, list_inputs, run_pipeline, write_stats_csv
from .rewards import eval_rewards, recovery_indicator
from .sampling import AnchorSampler, detect_anchors, kinetic_energy_proxy
from .smoothing import smooth_sequence
from .stats import compute_stats
from .termination import TerminationState, eval_bad_tracking, step_termination
from .tracking import TrackingPair, center_of_mass, sequence_body_states

log = logging.getLogger("motion_forge")


def _write_sequence(path, seq, skel, fmt: str) -> None:
    if fmt == "csv":
        io.save_csv(path, seq, skel)
    else:
        io.save_motion(path, seq, skel)


def cmd_correct(args, cfg: PipelineConfig) -> int:
    cfg = cfg.with_overrides(
        "correction",
        velocity_threshold=args.tau,
        gravity=args.gravity,
        skip_set=None if args.skip is None else frozenset(args.skip),
    )
    seq, skel = io.load_motion(args.input)
    out, report = correct_root_height(seq, skel, cfg.correction)
    _write_sequence(args.output, out, skel, args.format)
    if args.report:
        Path(args.report).write_text(io.dumps(report.to_dict()))
    return EXIT_WARNINGS if report.flagged else EXIT_OK


def cmd_smooth(args, cfg: PipelineConfig) -> int:
    window = args.window
    if window is not None and window != "adaptive":
        window = int(window)
    cfg = cfg.with_overrides("smoothing", window_length=window, poly_order=args.order)
    seq, skel = io.load_motion(args.input)
    channels = args.channels if args.channels is not None else cfg.smoothing_channels
    if isinstance(channels, str) and "," in channels:
        channels = channels.split(",")
    _write_sequence(args.output, smooth_sequence(seq, cfg.smoothing, channels), skel, args.format)
    return EXIT_OK


def cmd_stats(args, cfg: PipelineConfig) -> int:
    paths = [Path(p) for p in args.input or []]
    if args.input_dir:
        paths += list_inputs(args.input_dir)
    if not paths:
        raise NoInputError("no input sequences")
    seqs, skel = [], None
    for p in paths:
        seq, s = io.load_motion(p)
        seqs.append(seq)
        skel = skel or s
    stats = compute_stats(seqs, skel)
    if args.format == "json":
        Path(args.output).write_text(io.dumps(stats.as_row()))
    else:
        write_stats_csv(Path(args.output), [("ALL", stats)])
    return EXIT_OK


def cmd_anchors(args, cfg: PipelineConfig) -> int:
    sp = cfg.sampling
    seed = sp.seed if args.seed is None else args.seed
    seq, _ = io.load_motion(args.input)
    anchors = detect_anchors(kinetic_energy_proxy(seq), sp.plateau_tolerance)
    sampler = AnchorSampler(anchors, sp.alpha, sp.w_min, sp.w_max, seed)
    Path(args.output).write_text(io.dumps(sampler.to_dict()))
    return EXIT_OK


def cmd_reward_eval(args, cfg: PipelineConfig) -> int:
    robot, skel = io.load_motion(args.robot)
    ref, ref_skel = io.load_motion(args.reference)
    if len(robot) != len(ref):
        raise ValueError(f"robot has {len(robot)} frames, reference {len(ref)}")
    if ref_skel.n_dof != skel.n_dof or ref_skel.n_bodies != skel.n_bodies:
        raise ValueError("robot and reference skeletons differ")
    rob_states = sequence_body_states(robot, skel)
    ref_states = sequence_body_states(ref, skel)

    rows = []
    state = TerminationState()
    first_term = None
    for t in range(len(robot)):
        prev = max(t - 1, 0)
        pair = TrackingPair(
            rob_states[t], ref_states[t], skel,
            action=robot.joint_pos[t],
            previous_action=robot.joint_pos[prev],
            previous_com_xy=center_of_mass(rob_states[prev], skel)[:2],
        )
        row = {"frame": t, **eval_rewards(pair, cfg.rewards).to_row()}
        if args.terminate:
            flags = eval_bad_tracking(pair, cfg.termination)
            recovering = {"auto": recovery_indicator(pair, cfg.rewards), "always": True, "never": False}[
                args.recovering
            ]
            row.update(bad_pos=int(flags.position), bad_ori=int(flags.orientation),
                       bad_body=int(flags.body), recovering=int(recovering))
            if first_term is None:
                state = step_termination(state, flags, recovering, cfg.termination)
                if state.terminated:
                    first_term = t
            row["terminated"] = int(first_term is not None)
        rows.append(row)

    if args.format == "json":
        # unavailable terms are NaN in memory and null on disk
        doc = {"frames": [{k: None if v != v else v for k, v in r.items()} for r in rows]}
        if args.terminate:
            doc["first_termination"] = first_term
        Path(args.output).write_text(io.dumps(doc))
    else:
        with open(args.output, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    if args.terminate:
        print(f"first_termination={'none' if first_term is None else first_term}")
    return EXIT_OK


def cmd_augment(args, cfg: PipelineConfig) -> int:
    seq, skel = io.load_pool(args.pool)
    pool = PosePool.from_sequence(seq, rng_seed=args.seed)
    poses = recombine(pool, args.count, skel)
    _write_sequence(args.output, poses_to_sequence(poses, seq.fps, skel.name), skel, args.format)
    return EXIT_OK


def cmd_pipeline(args, cfg: PipelineConfig) -> int:
    if args.seed is not None:
        cfg = cfg.with_overrides("sampling", seed=args.seed)
    return run_pipeline(cfg, args.input_dir, args.output_dir or args.output, args.jobs)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="motion-forge", description="Clean, analyze and score humanoid motion.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        if output:
            p.add_argument("--output", required=True)
        return p

    p = common(sub.add_parser("correct", help="root height drift correction"))
    p.add_argument("--input", required=True)
    p.add_argument("--report")
    p.add_argument("--tau", type=float, help="velocity threshold, m/frame")
    p.add_argument("--gravity", type=float, help="m/s^2")
    p.add_argument("--skip", type=int, nargs="*", help="frames excluded from jump treatment")
    p.set_defaults(func=cmd_correct)

    p = common(sub.add_parser("smooth", help="Savitzky-Golay smoothing"))
    p.add_argument("--input", required=True)
    p.add_argument("--window", help="odd window length or 'adaptive'")
    p.add_argument("--order", type=int)
    p.add_argument("--channels", help="all, root, joints or comma-separated channel names")
    p.set_defaults(func=cmd_smooth)

    p = common(sub.add_parser("stats", help="dataset velocity statistics"))
    p.add_argument("--input", nargs="*")
    p.add_argument("--input-dir")
    p.set_defaults(func=cmd_stats, format="csv")

    p = common(sub.add_parser("anchors", help="low kinetic energy anchors"))
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_anchors)

    p = common(sub.add_parser("reward-eval", help="per-frame reward terms"))
    p.add_argument("--robot", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--terminate", action="store_true", help="also run bad-tracking termination")
    p.add_argument("--recovering", choices=("auto", "always", "never"), default="auto")
    p.set_defaults(func=cmd_reward_eval, format="csv")

    p = common(sub.add_parser("augment", help="recombine fall poses"))
    p.add_argument("--pool", required=True)
    p.add_argument("--count", type=int, default=1000)
    p.set_defaults(func=cmd_augment, seed=0)

    p = common(sub.add_parser("pipeline", help="correct, smooth, stats and anchors for a directory"), output=False)
    p.add_argument("--input-dir")
    p.add_argument("--output-dir")
    p.add_argument("--output", help="alias for --output-dir")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("MOTION_FORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except NoInputError as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
