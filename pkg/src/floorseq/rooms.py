"""Sequential room identification with per-room density functions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import DensityGrid, GridSpec, LayoutBoundary, Pose, rasterize_polygon, signed_area
from .layout import register_points
from .planes import OrientationPosterior


class RoomStatus(enum.Enum):
    ACTIVE = "active"
    DORMANT = "dormant"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class ClipConfig:
    radius: float = 4.0
    membership_threshold: float = 0.5
    patience: int = 10
    cell_size: float = 0.1

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("clip radius must be positive")
        if not 0 < self.membership_threshold < 1:
            raise ValueError("membership threshold must lie in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")


@dataclass(frozen=True)
class RoomState:
    room_id: int
    H: DensityGrid
    frame_count: int = 0
    boundary_archive: tuple[LayoutBoundary, ...] = ()
    status: RoomStatus = RoomStatus.ACTIVE
    wall_points: tuple[np.ndarray, ...] = ()
    posteriors: tuple[OrientationPosterior, ...] = ()
    keyframes: tuple[int, ...] = ()

    def density_at(self, point) -> float:
        return self.H.value_at(point)


def clip_points(points: np.ndarray, r: float) -> np.ndarray:
    """Radially limit camera-frame 3D points to norm ``r``."""
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    scale = np.where(norms > r, r / np.maximum(norms, 1e-300), 1.0)
    return points * scale


def clip_boundary(boundary: LayoutBoundary, pose: Pose, s: float, r: float) -> np.ndarray:
    """Clipped layout loop B_i as ordered world (x, z) points."""
    if r <= 0 or s <= 0:
        raise ValueError("radius and scale must be positive")
    return register_points(clip_points(boundary.points, r), pose, s)[:, [0, 2]]


def empty_room(room_id: int, cell_size: float = 0.1) -> RoomState:
    return RoomState(room_id, DensityGrid((0.0, 0.0), cell_size, np.zeros((1, 1))))


def _union_spec(a: GridSpec, b: GridSpec) -> tuple[GridSpec, tuple[int, int], tuple[int, int]]:
    c = a.cell_size
    a0 = np.rint(np.asarray(a.origin) / c).astype(int)
    b0 = np.rint(np.asarray(b.origin) / c).astype(int)
    lo = np.minimum(a0, b0)
    hi = np.maximum(a0 + a.shape, b0 + b.shape)
    spec = GridSpec((lo[0] * c, lo[1] * c), c, tuple(hi - lo))
    return spec, tuple(a0 - lo), tuple(b0 - lo)


def update_density(room: RoomState, loop: np.ndarray) -> RoomState:
    """Fold the interior of a closed clipped loop into the room's running-mean density."""
    loop = np.asarray(loop, dtype=float)
    if loop.ndim != 2 or len(loop) < 3 or abs(signed_area(loop)) < 1e-12:
        raise ValueError("clipped boundary is not a closed loop with nonzero area")
    c = room.H.cell_size
    loop_spec = GridSpec.covering(loop, c, margin_cells=1)
    inside = rasterize_polygon(loop, loop_spec).astype(float)
    n = room.frame_count
    if n == 0:
        H = DensityGrid(loop_spec.origin, c, inside)
    else:
        spec, off_old, off_new = _union_spec(room.H.spec, loop_spec)
        old = np.zeros(spec.shape)
        old[off_old[0]:off_old[0] + room.H.rows, off_old[1]:off_old[1] + room.H.cols] = room.H.values
        ind = np.zeros(spec.shape)
        ind[off_new[0]:off_new[0] + inside.shape[0], off_new[1]:off_new[1] + inside.shape[1]] = inside
        H = DensityGrid(spec.origin, c, np.clip((old * n + ind) / (n + 1), 0.0, 1.0))
    return replace(room, H=H, frame_count=n + 1)


class Decision(enum.Enum):
    STAY = "stay"
    REENTER = "reenter"
    CREATE_NEW = "create_new"


@dataclass(frozen=True)
class Identification:
    decision: Decision
    room_id: int | None = None


def identify(pose: Pose, s: float, rooms, config: ClipConfig = ClipConfig(),
             current: int | None = None) -> Identification:
    """Decide which room the camera of ``pose`` belongs to.

    The current (active) room is checked first; otherwise the dormant room
    with the highest density at the camera cell wins (ties to the lowest id).
    """
    by_id = {r.room_id: r for r in rooms}
    if current is None:
        active = [r for r in rooms if r.status is RoomStatus.ACTIVE]
        current = active[0].room_id if active else None
    cam = pose.position_2d(s)
    thr = config.membership_threshold
    if current is not None and by_id[current].density_at(cam) >= thr:
        return Identification(Decision.STAY, current)
    best = None
    for r in sorted(rooms, key=lambda r: r.room_id):
        if r.status is not RoomStatus.DORMANT:
            continue
        val = r.density_at(cam)
        if val >= thr and (best is None or val > best[0]):
            best = (val, r.room_id)
    if best is not None:
        return Identification(Decision.REENTER, best[1])
    return Identification(Decision.CREATE_NEW)


def finalize_rooms(rooms, history, patience: int, end_of_stream: bool = False) -> list[RoomState]:
    """Rooms that become finalized given the per-keyframe assignment history.

    A dormant room finalizes once the last ``patience`` assignments all went
    to other rooms. At end of stream every room not yet finalized does.
    """
    out = []
    for r in rooms:
        if r.status is RoomStatus.FINALIZED:
            continue
        if end_of_stream:
            out.append(replace(r, status=RoomStatus.FINALIZED))
            continue
        if r.status is not RoomStatus.DORMANT:
            continue
        tail = history[-patience:]
        if len(tail) >= patience and all(h != r.room_id for h in tail):
            out.append(replace(r, status=RoomStatus.FINALIZED))
    return out


@dataclass
class RoomTracker:
    """Single-writer room registry driven one keyframe at a time."""

    config: ClipConfig = field(default_factory=ClipConfig)
    rooms: dict[int, RoomState] = field(default_factory=dict)
    history: list[int] = field(default_factory=list)
    current: int | None = None

    def _set(self, room: RoomState):
        self.rooms[room.room_id] = room

    def assign(self, boundary: LayoutBoundary, pose: Pose, s: float, keyframe: int = -1):
        """Identify the keyframe's room, update its density, and return (room_id, decision)."""
        ident = identify(pose, s, list(self.rooms.values()), self.config, self.current)
        if ident.decision is Decision.CREATE_NEW:
            room_id = len(self.rooms)
            self._deactivate_current()
            self._set(replace(empty_room(room_id, self.config.cell_size)))
        elif ident.decision is Decision.REENTER:
            room_id = ident.room_id
            self._deactivate_current()
            self._set(replace(self.rooms[room_id], status=RoomStatus.ACTIVE))
        else:
            room_id = ident.room_id
        self.current = room_id
        loop = clip_boundary(boundary, pose, s, self.config.radius)
        room = update_density(self.rooms[room_id], loop)
        self._set(replace(room, keyframes=room.keyframes + (keyframe,)))
        self.history.append(room_id)
        return room_id, ident.decision

    def _deactivate_current(self):
        if self.current is not None:
            self._set(replace(self.rooms[self.current], status=RoomStatus.DORMANT))

    def add_evidence(self, room_id: int, boundary: LayoutBoundary, wall_points=(), posteriors=None):
        room = self.rooms[room_id]
        room = replace(room, boundary_archive=room.boundary_archive + (boundary,),
                       wall_points=room.wall_points + tuple(wall_points))
        if posteriors is not None:
            room = replace(room, posteriors=tuple(posteriors))
        self._set(room)

    def finalize(self, end_of_stream: bool = False) -> list[RoomState]:
        done = finalize_rooms(list(self.rooms.values()), self.history, self.config.patience, end_of_stream)
        for r in done:
            self._set(r)
        if end_of_stream:
            self.current = None
        return done
