"""Sequential floor-plan reconstruction from a keyframe stream.

Phase 1 fixes the odometry scale on the warm-up keyframes. Phase 2 replays
every keyframe at that scale: project, register, identify the room, update
its density, validate walls, and filter wall orientations. Rooms are solved
on a worker pool as soon as they finalize.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .evidence import room_evidence
from .io import FloorPlanOutput
from .layout import Keyframe, register_boundary
from .planes import fit_wall, likely_orientations, update_orientation
from .rooms import RoomState, RoomTracker
from .scale import recover_scale
from .shape import NoRoomError, ShapeSolution, solve_room_detailed

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    pass


@dataclass
class RoomResult:
    room_id: int
    solution: ShapeSolution | None
    evidence: tuple | None
    thetas: list[float]
    seconds: float
    error: str | None = None


@dataclass
class PipelineResult:
    output: FloorPlanOutput
    scale: float
    assignments: dict[int, int]  # keyframe index -> room id
    rooms: dict[int, RoomState]
    room_results: dict[int, RoomResult]
    failures: list[tuple[int, str]] = field(default_factory=list)  # (keyframe index, message)

    @property
    def runtime_per_room(self) -> float:
        done = [r.seconds for r in self.room_results.values() if r.solution is not None]
        return float(np.mean(done)) if done else 0.0


def _checked_boundary(kf: Keyframe):
    if not (np.all(np.isfinite(kf.pose.translation)) and np.all(np.isfinite(kf.pose.rotation))):
        raise ValueError("pose is not finite")
    return kf.camera_boundary()


def solve_finalized_room(room: RoomState, config: PipelineConfig) -> RoomResult:
    comp = config.build()
    t0 = time.perf_counter()
    thetas = likely_orientations(room.posteriors, comp.orient.accept)
    try:
        M_P, M_H = room_evidence(room.H, room.wall_points, comp.schedule.rounds[-1].grid_size,
                                 comp.clip.membership_threshold)
        sol = solve_room_detailed(M_P, M_H, thetas, comp.weights, comp.schedule, room.room_id)
    except (NoRoomError, ValueError) as exc:
        log.warning("room %d: shape optimization failed: %s", room.room_id, exc)
        return RoomResult(room.room_id, None, None, thetas, time.perf_counter() - t0, str(exc))
    return RoomResult(room.room_id, sol, (M_P, M_H), thetas, time.perf_counter() - t0)


def run_pipeline(keyframes: Sequence[Keyframe], config: PipelineConfig | None = None, *,
                 input_hash: str = "", debug_dir: str | Path | None = None) -> PipelineResult:
    """Reconstruct room polygons from a keyframe stream.

    Raises:
        PipelineError: the stream is empty or no keyframe survives phase 1.
    """
    config = PipelineConfig() if config is None else config
    comp = config.build()
    frames = list(keyframes)
    if not frames:
        raise PipelineError("empty stream")

    # phase 1: scale from the warm-up frames
    n_warm = comp.scale.warmup_count(len(frames))
    warm_b, warm_p = [], []
    for kf in frames:
        if len(warm_b) == n_warm:
            break
        # a skipped frame is replaced by the next usable one
        try:
            warm_b.append(_checked_boundary(kf))
            warm_p.append(kf.pose)
        except ValueError as exc:
            log.warning("keyframe %d skipped during warm-up: %s", kf.index, exc)
    if not warm_b:
        raise PipelineError("no usable warm-up keyframes")
    s = recover_scale(warm_b, warm_p, comp.scale)
    log.info("scale %.4f from %d warm-up keyframes", s, len(warm_b))

    # phase 2: replay every keyframe at the fixed scale
    tracker = RoomTracker(comp.clip)
    assignments: dict[int, int] = {}
    positions: dict[int, np.ndarray] = {}
    failures: list[tuple[int, str]] = []
    futures: dict[int, Future] = {}
    with ThreadPoolExecutor(max_workers=comp.workers) as pool:
        for kf in frames:
            try:
                boundary = _checked_boundary(kf)
                room_id, decision = tracker.assign(boundary, kf.pose, s, kf.index)
                world = register_boundary(boundary, kf.pose, s)
                cam = kf.pose.position_2d(s)
                posteriors = list(tracker.rooms[room_id].posteriors)
                walls = []
                for subset in world.wall_subsets():
                    feat = fit_wall(world.xz[subset], comp.ransac, camera=cam)
                    if feat.valid:
                        walls.append(feat.points)
                        posteriors = update_orientation(posteriors, (feat.direction_angle, feat.distance),
                                                        comp.orient)
                tracker.add_evidence(room_id, world, walls, posteriors)
                assignments[kf.index] = room_id
                positions[kf.index] = cam
            except Exception as exc:  # skip-and-log: one bad keyframe must not end the run
                log.warning("keyframe %d skipped: %s", kf.index, exc)
                failures.append((kf.index, str(exc)))
                continue
            for room in tracker.finalize():
                log.info("room %d finalized after keyframe %d", room.room_id, kf.index)
                futures[room.room_id] = pool.submit(solve_finalized_room, room, config)
        for room in tracker.finalize(end_of_stream=True):
            futures[room.room_id] = pool.submit(solve_finalized_room, room, config)
        results = {rid: f.result() for rid, f in sorted(futures.items())}

    if not assignments:
        raise PipelineError("every keyframe failed")
    polygons = [r.solution.polygon for r in results.values() if r.solution is not None]
    out = FloorPlanOutput(polygons, float(s), config.digest(), input_hash, positions)
    result = PipelineResult(out, float(s), assignments, dict(tracker.rooms), results, failures)
    if debug_dir is not None:
        from .debug import dump_debug
        dump_debug(result, debug_dir)
    return result
