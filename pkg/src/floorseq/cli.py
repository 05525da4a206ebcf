"""Command line: run, synth, eval, debug-maps.

Exit codes: 0 success, 1 input error, 2 pipeline failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys

import numpy as np

from .config import ConfigError, PipelineConfig, read_config
from .io import (StreamError, read_ground_truth, read_output, read_stream, sha256_bytes, write_ground_truth,
                 write_output, write_stream)
from .metrics import align_to_ground_truth, evaluate
from .pipeline import PipelineError, run_pipeline
from .synth import NoiseSpec, SceneSpec, generate, grid_scene

EXIT_OK, EXIT_INPUT, EXIT_PIPELINE = 0, 1, 2

log = logging.getLogger("floorseq")


class InputError(Exception):
    pass


def _load_config(args) -> PipelineConfig:
    cfg = read_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    if getattr(args, "warmup", None) is not None:
        overrides["scale__warmup_fraction"] = args.warmup
    if getattr(args, "seed", None) is not None:
        overrides["ransac__seed"] = args.seed
    return cfg.with_overrides(**overrides) if overrides else cfg


def _read_input(path: str):
    data = sys.stdin.buffer.read() if path == "-" else open(path, "rb").read()
    records = read_stream(io.StringIO(data.decode("utf-8")))
    return [r.to_keyframe() for r in records], sha256_bytes(data)


def _run(args, dump_dir=None) -> int:
    cfg = _load_config(args)
    frames, digest = _read_input(args.input)
    if not frames:
        raise InputError("empty stream")
    result = run_pipeline(frames, cfg, input_hash=digest, debug_dir=dump_dir)
    if args.output:
        write_output(result.output, args.output)
    else:
        json.dump(result.output.to_dict(), sys.stdout, indent=1)
        sys.stdout.write("\n")
    log.info("%d rooms, scale %.4f, %d keyframes skipped", len(result.output.rooms), result.scale,
             len(result.failures))
    return EXIT_OK


def cmd_run(args) -> int:
    return _run(args, args.dump_debug)


def cmd_debug_maps(args) -> int:
    return _run(args, args.dump_debug)


def cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed)
    rooms, traj = grid_scene(args.rooms, rng, dwell=args.dwell)
    scale = args.scale if args.scale is not None else float(rng.uniform(0.5, 3.0))
    noise = NoiseSpec(np.radians(args.sigma_phi_deg), args.sigma_t, args.occlusion)
    frames, gt = generate(SceneSpec(rooms, traj, scale, noise, columns=args.columns, seed=args.seed))
    if args.output in (None, "-"):
        write_stream(frames, sys.stdout)
    else:
        write_stream(frames, args.output)
    if args.gt:
        write_ground_truth(gt, args.gt)
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = read_output(args.prediction)
    gt = read_ground_truth(args.gt)
    alignment = None
    if pred.room_positions:
        idx = sorted(k for k in pred.room_positions if 0 <= k < len(gt.positions))
        alignment = align_to_ground_truth([pred.room_positions[k] for k in idx], gt.positions[idx])
    report = evaluate(pred.rooms, gt.rooms, alignment)
    text = report.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="floorseq", description="Sequential multi-room floor plans from 360 layouts.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_flags(sp, debug_required=False):
        sp.add_argument("--input", required=True, help="keyframe stream (JSON lines), or '-' for stdin")
        sp.add_argument("--output", help="floor plan JSON (default: stdout)")
        sp.add_argument("--config", help="flat JSON config file")
        sp.add_argument("--seed", type=int, help="RANSAC seed")
        sp.add_argument("--warmup", type=float, help="fraction of keyframes used for scale recovery")
        sp.add_argument("--dump-debug", required=debug_required, metavar="DIR", help="write debug images here")

    run = sub.add_parser("run", help="keyframe stream -> floor plan")
    pipeline_flags(run)
    run.set_defaults(func=cmd_run)

    dbg = sub.add_parser("debug-maps", help="run and dump H, M_P, M_H and round images")
    pipeline_flags(dbg, debug_required=True)
    dbg.set_defaults(func=cmd_debug_maps)

    syn = sub.add_parser("synth", help="synthetic scene -> keyframe stream + ground truth")
    syn.add_argument("--output", help="stream path (default: stdout)")
    syn.add_argument("--gt", help="ground-truth bundle path")
    syn.add_argument("--rooms", type=int, default=3)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--scale", type=float, help="hidden odometry scale (default: drawn from [0.5, 3])")
    syn.add_argument("--sigma-phi-deg", type=float, default=0.0)
    syn.add_argument("--sigma-t", type=float, default=0.0)
    syn.add_argument("--occlusion", type=float, default=0.0)
    syn.add_argument("--dwell", type=int, default=8)
    syn.add_argument("--columns", type=int, default=512)
    syn.set_defaults(func=cmd_synth)

    ev = sub.add_parser("eval", help="floor plan + ground truth -> report")
    ev.add_argument("--prediction", required=True)
    ev.add_argument("--gt", required=True)
    ev.add_argument("--output", help="report path (default: stdout)")
    ev.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (StreamError, ConfigError, InputError, OSError, UnicodeDecodeError, json.JSONDecodeError,
            KeyError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PipelineError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except Exception as exc:  # anything else inside the stages
        print(f"pipeline failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
