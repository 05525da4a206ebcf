"""Synthetic multi-room scenes and scale-ambiguous keyframe streams.

Rooms are closed polygons in a ground-truth world frame with camera height 1.
The emitted odometry frame is the first camera's frame, with translations
divided by the hidden true scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose, RoomPolygon, point_in_polygon, yaw_rotation
from .layout import Keyframe, RawLayout, column_azimuths


@dataclass(frozen=True)
class NoiseSpec:
    sigma_phi: float = 0.0  # radians
    sigma_t: float = 0.0  # odometry units
    occlusion_prob: float = 0.0


@dataclass
class SceneSpec:
    rooms: list[RoomPolygon]
    trajectory: np.ndarray  # (K, 2) keyframe camera positions, ground-truth world
    true_scale: float = 1.0
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    columns: int = 512
    seed: int = 0
    yaws: np.ndarray | None = None
    camera_height: float = 1.0

    def __post_init__(self):
        self.trajectory = np.asarray(self.trajectory, dtype=float).reshape(-1, 2)
        if self.true_scale <= 0:
            raise ValueError("true_scale must be positive")
        if self.yaws is not None and len(self.yaws) != len(self.trajectory):
            raise ValueError("need one yaw per trajectory point")


@dataclass
class GroundTruth:
    rooms: list[RoomPolygon]
    true_scale: float
    positions: np.ndarray  # (K, 2) true camera positions
    yaws: np.ndarray
    labels: np.ndarray  # room index per keyframe

    @property
    def corners(self) -> np.ndarray:
        return np.vstack([r.corners for r in self.rooms])

    def odometry_to_world(self, points: np.ndarray) -> np.ndarray:
        """Map (x, z) points registered at the true scale from the odometry frame into this frame."""
        c, sn = np.cos(self.yaws[0]), np.sin(self.yaws[0])
        # (x, z) action of yaw_rotation(yaw0)
        rot = np.array([[c, sn], [-sn, c]])
        return np.asarray(points, dtype=float).reshape(-1, 2) @ rot.T + self.positions[0]


def cast_rays(origin: np.ndarray, azimuths: np.ndarray, corners: np.ndarray):
    """Distance along each world azimuth to the first polygon edge, and that edge's index."""
    d = np.column_stack([np.sin(azimuths), np.cos(azimuths)])
    a = corners
    b = np.roll(corners, -1, axis=0)
    e = b - a
    w = a - origin
    # origin + rho*d = a + tau*e  ->  [d, -e] [rho, tau]^T = w
    den = d[:, None, 0] * (-e[None, :, 1]) - d[:, None, 1] * (-e[None, :, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = (w[None, :, 0] * (-e[None, :, 1]) - w[None, :, 1] * (-e[None, :, 0])) / den
        tau = (d[:, None, 0] * w[None, :, 1] - d[:, None, 1] * w[None, :, 0]) / den
    ok = (np.abs(den) > 1e-12) & (rho > 1e-9) & (tau >= -1e-9) & (tau <= 1 + 1e-9)
    rho = np.where(ok, rho, np.inf)
    edge = np.argmin(rho, axis=1)
    dist = rho[np.arange(len(azimuths)), edge]
    if not np.all(np.isfinite(dist)):
        raise ValueError("camera is not enclosed by the room polygon")
    return dist, edge


def room_label(point, rooms: list[RoomPolygon]) -> int:
    for i, r in enumerate(rooms):
        if point_in_polygon(point, r):
            return i
    return -1


def generate(spec: SceneSpec) -> tuple[list[Keyframe], GroundTruth]:
    """Ray-cast every trajectory pose and emit a noisy, scale-ambiguous keyframe stream."""
    rng = np.random.default_rng(spec.seed)
    K = len(spec.trajectory)
    if K == 0:
        raise ValueError("empty trajectory")
    yaws = rng.uniform(-np.pi, np.pi, K) if spec.yaws is None else np.asarray(spec.yaws, dtype=float)
    h = spec.camera_height
    theta = column_azimuths(spec.columns)
    labels = np.array([room_label(c, spec.rooms) for c in spec.trajectory])
    if np.any(labels < 0):
        i = int(np.flatnonzero(labels < 0)[0])
        raise ValueError(f"trajectory point {i} {spec.trajectory[i].tolist()} lies outside every room")

    R0t = yaw_rotation(yaws[0]).T
    c0 = spec.trajectory[0]
    frames = []
    for i, (c, yaw, lab) in enumerate(zip(spec.trajectory, yaws, labels)):
        rho, edge = cast_rays(c, theta + yaw, spec.rooms[lab].corners)
        corner_cols = np.flatnonzero(edge != np.roll(edge, 1))
        if spec.noise.occlusion_prob > 0 and rng.random() < spec.noise.occlusion_prob:
            span = int(rng.integers(spec.columns // 20, spec.columns // 6 + 1))
            start = int(rng.integers(0, spec.columns))
            cols = (start + np.arange(span)) % spec.columns
            rho = rho.copy()
            rho[cols] *= rng.uniform(0.5, 0.8)
        phi = np.arctan2(h, rho)
        if spec.noise.sigma_phi > 0:
            phi = phi + rng.normal(0.0, spec.noise.sigma_phi, spec.columns)
        phi = np.clip(phi, 1e-4, np.pi / 2 - 1e-4)

        delta = np.array([c[0] - c0[0], 0.0, c[1] - c0[1]])
        t = R0t @ delta / spec.true_scale
        if spec.noise.sigma_t > 0 and i > 0:
            t = t + np.array([rng.normal(0, spec.noise.sigma_t), 0.0, rng.normal(0, spec.noise.sigma_t)])
        pose = Pose(yaw_rotation(yaw - yaws[0]), t, timestamp=i)
        frames.append(Keyframe(i, pose, RawLayout(phi, tuple(corner_cols.tolist()))))

    gt = GroundTruth(list(spec.rooms), spec.true_scale, spec.trajectory.copy(), yaws, labels)
    return frames, gt


# --- scene builders ---------------------------------------------------------

def rectangle(x0: float, z0: float, x1: float, z1: float, room_id: int = 0) -> RoomPolygon:
    return RoomPolygon([[x0, z0], [x1, z0], [x1, z1], [x0, z1]], room_id)


def transform_polygon(poly: RoomPolygon, angle: float = 0.0, offset=(0.0, 0.0)) -> RoomPolygon:
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    return RoomPolygon(poly.corners @ rot.T + np.asarray(offset), poly.room_id)


def l_shape(width: float, depth: float, cut_w: float, cut_d: float, room_id: int = 0) -> RoomPolygon:
    """Rectangle [0, width] x [0, depth] with the top-right cut_w x cut_d block removed."""
    return RoomPolygon([[0, 0], [width, 0], [width, depth - cut_d], [width - cut_w, depth - cut_d],
                        [width - cut_w, depth], [0, depth]], room_id)


def random_room(rng: np.random.Generator, room_id: int = 0, l_prob: float = 0.4) -> RoomPolygon:
    """Rectangle or L-shaped room with sides of 3-6 units, centred on the origin."""
    w, d = rng.uniform(3.0, 6.0, 2)
    if rng.random() < l_prob:
        poly = l_shape(w, d, rng.uniform(0.3, 0.5) * w, rng.uniform(0.3, 0.5) * d, room_id)
    else:
        poly = rectangle(0, 0, w, d, room_id)
    return transform_polygon(poly, 0.0, -poly.corners.mean(axis=0))


def _dwell_points(rng, lo, hi, n, spread=0.3):
    center = (lo + hi) / 2
    half = (hi - lo) / 2
    return center + rng.uniform(-spread, spread, (n, 2)) * 2 * half


def grid_scene(n_rooms: int, rng: np.random.Generator, *, dwell: int = 8, revisit: bool = True,
               door_offset: float = 0.45) -> tuple[list[RoomPolygon], np.ndarray]:
    """Rectangular rooms tiled on a grid, visited in snake order with one optional revisit.

    Returns (rooms, trajectory). Consecutive rooms share a wall; the camera
    crosses it through a doorway at the wall midpoint. The revisit returns to
    the previous room briefly, within the default dormancy patience.
    """
    ncols = int(np.ceil(np.sqrt(n_rooms)))
    nrows = int(np.ceil(n_rooms / ncols))
    xs = np.concatenate([[0.0], np.cumsum(rng.uniform(3.0, 5.0, ncols))])
    zs = np.concatenate([[0.0], np.cumsum(rng.uniform(3.0, 5.0, nrows))])
    cells = []
    for r in range(nrows):
        order = range(ncols) if r % 2 == 0 else range(ncols - 1, -1, -1)
        cells.extend((r, c) for c in order)
    cells = cells[:n_rooms]
    rooms = [rectangle(xs[c], zs[r], xs[c + 1], zs[r + 1], k) for k, (r, c) in enumerate(cells)]
    bounds = [(np.array([xs[c], zs[r]]), np.array([xs[c + 1], zs[r + 1]])) for r, c in cells]

    def door(a, b):
        (ra, ca), (rb, cb) = cells[a], cells[b]
        (lo_a, hi_a), (lo_b, hi_b) = bounds[a], bounds[b]
        if ra == rb:  # shared vertical wall x = const
            x = hi_a[0] if cb > ca else lo_a[0]
            zlo, zhi = max(lo_a[1], lo_b[1]), min(hi_a[1], hi_b[1])
            mid = np.array([x, (zlo + zhi) / 2])
            normal = np.array([1.0 if cb > ca else -1.0, 0.0])
        else:
            z = hi_a[1] if rb > ra else lo_a[1]
            xlo, xhi = max(lo_a[0], lo_b[0]), min(hi_a[0], hi_b[0])
            mid = np.array([(xlo + xhi) / 2, z])
            normal = np.array([0.0, 1.0 if rb > ra else -1.0])
        return mid - door_offset * normal, mid + door_offset * normal

    revisit_at = int(rng.integers(1, n_rooms)) if (revisit and n_rooms > 1) else -1
    traj = []
    for k in range(n_rooms):
        lo, hi = bounds[k]
        if k > 0:
            _, enter = door(k - 1, k)
            traj.append(enter)
        traj.extend(_dwell_points(rng, lo, hi, dwell if k != revisit_at else max(3, dwell // 2)))
        if k == revisit_at:
            leave, back = door(k, k - 1)
            traj.append(leave)
            traj.append(back)
            plo, phi_ = bounds[k - 1]
            traj.extend(_dwell_points(rng, plo, phi_, 3))
            _, reenter = door(k - 1, k)
            traj.append(door(k - 1, k)[0])
            traj.append(reenter)
            traj.extend(_dwell_points(rng, lo, hi, 2))
        if k + 1 < n_rooms:
            leave, _ = door(k, k + 1)
            traj.append(leave)
    return rooms, np.array(traj)


def single_room_scene(poly: RoomPolygon, rng: np.random.Generator, n_frames: int = 20,
                      spread: float = 0.25) -> np.ndarray:
    """Trajectory of interior points near the room's centroid (rejection-sampled)."""
    lo, hi = poly.corners.min(axis=0), poly.corners.max(axis=0)
    pts = []
    while len(pts) < n_frames:
        p = _dwell_points(rng, lo, hi, 1, spread)[0]
        if point_in_polygon(p, poly):
            pts.append(p)
    return np.array(pts)
