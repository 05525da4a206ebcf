"""Shared geometric types: poses, layout boundaries, world-anchored grids, polygons.

World convention: y is up, the floor is the plane y = -h with h = 1 for the
first keyframe, and every 2D map lives in the (x, z) plane. Grid cell (u, v)
covers x in [ox + u*c, ox + (u+1)*c) and z in [oz + v*c, oz + (v+1)*c).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-6


class DegenerateInputError(ValueError):
    """Raised when an operation has too little data to produce a meaningful result."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def yaw_rotation(yaw: float) -> np.ndarray:
    """Rotation about +y by ``yaw`` radians.

    In the (x, z) plane a camera-frame azimuth theta maps to world azimuth
    theta + yaw, with azimuth measured from +z towards +x.
    """
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class Pose:
    """World-from-camera pose with scale-ambiguous translation."""

    rotation: np.ndarray
    translation: np.ndarray
    timestamp: int = 0

    def __post_init__(self):
        R = _frozen(self.rotation)
        t = _frozen(self.translation)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {t.shape}")
        if not np.allclose(R.T @ R, np.eye(3), atol=ORTHO_TOL) or abs(np.linalg.det(R) - 1.0) > ORTHO_TOL:
            raise ValueError("rotation is not a proper orthonormal matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @classmethod
    def from_yaw(cls, yaw: float, translation, timestamp: int = 0) -> "Pose":
        return cls(yaw_rotation(yaw), translation, timestamp)

    def position_2d(self, s: float) -> np.ndarray:
        """Camera (x, z) position in the world at odometry scale ``s``."""
        return s * self.translation[[0, 2]]


class Frame(enum.Enum):
    CAMERA = "camera"
    WORLD = "world"


@dataclass(frozen=True)
class LayoutBoundary:
    """Ordered floor-boundary points of one keyframe.

    ``points`` is (W, 3); ``wall_splits`` are the columns where one wall
    subset ends and the next begins. Subsets wrap around column 0.
    """

    points: np.ndarray
    wall_splits: tuple[int, ...] = ()
    frame: Frame = Frame.CAMERA
    columns: np.ndarray | None = None

    def __post_init__(self):
        pts = _frozen(self.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (W, 3), got {pts.shape}")
        n = len(pts)
        splits = tuple(int(c) for c in self.wall_splits)
        if any(b <= a for a, b in zip(splits, splits[1:])):
            raise ValueError("wall_splits must be strictly increasing")
        if splits and (splits[0] < 0 or splits[-1] >= n):
            raise ValueError(f"wall_splits must lie in [0, {n})")
        cols = np.arange(n) if self.columns is None else np.asarray(self.columns, dtype=int)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "wall_splits", splits)
        object.__setattr__(self, "columns", _frozen(cols, int))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def xz(self) -> np.ndarray:
        return self.points[:, [0, 2]]

    def wall_subsets(self) -> list[np.ndarray]:
        """Index arrays S_0..S_k; each point belongs to exactly one subset."""
        n = len(self.points)
        if not self.wall_splits:
            return [np.arange(n)]
        splits = list(self.wall_splits)
        subsets = [np.arange(a, b) for a, b in zip(splits, splits[1:])]
        # the last subset wraps through column 0 back to the first split
        subsets.append(np.concatenate([np.arange(splits[-1], n), np.arange(0, splits[0])]))
        return [s for s in subsets if len(s)]


@dataclass(frozen=True)
class GridSpec:
    origin: tuple[float, float]
    cell_size: float
    shape: tuple[int, int]

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if len(self.shape) != 2 or min(self.shape) <= 0:
            raise ValueError(f"grid dims must be positive, got {self.shape}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "shape", (int(self.shape[0]), int(self.shape[1])))

    @classmethod
    def covering(cls, points: np.ndarray, cell_size: float, margin_cells: int = 1) -> "GridSpec":
        """Grid aligned to multiples of ``cell_size`` that covers ``points`` plus a margin."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        lo = np.floor(pts.min(axis=0) / cell_size) - margin_cells
        hi = np.floor(pts.max(axis=0) / cell_size) + margin_cells + 1
        shape = (hi - lo).astype(int)
        return cls((lo[0] * cell_size, lo[1] * cell_size), cell_size, (shape[0], shape[1]))

    def cell_index(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.floor((pts - np.asarray(self.origin)) / self.cell_size).astype(np.int64)

    def cell_centers(self) -> np.ndarray:
        """(rows, cols, 2) array of world (x, z) cell centers."""
        u = self.origin[0] + (np.arange(self.shape[0]) + 0.5) * self.cell_size
        v = self.origin[1] + (np.arange(self.shape[1]) + 0.5) * self.cell_size
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return np.stack([uu, vv], axis=-1)


@dataclass(frozen=True)
class DensityGrid:
    """World-anchored 2D scalar map indexed as ``values[u, v]`` (u along x, v along z)."""

    origin: tuple[float, float]
    cell_size: float
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim != 2:
            raise ValueError("values must be 2D")
        if np.any(vals < 0):
            raise ValueError("density grid values must be nonnegative")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.origin, self.cell_size, self.values.shape)

    def sample(self, points) -> np.ndarray:
        """Values at the cells containing ``points``; zero outside the grid."""
        idx = self.spec.cell_index(points)
        ok = (idx[:, 0] >= 0) & (idx[:, 0] < self.rows) & (idx[:, 1] >= 0) & (idx[:, 1] < self.cols)
        out = np.zeros(len(idx))
        out[ok] = self.values[idx[ok, 0], idx[ok, 1]]
        return out

    def value_at(self, point) -> float:
        return float(self.sample(np.asarray(point, dtype=float).reshape(1, 2))[0])

    def with_values(self, values: np.ndarray) -> "DensityGrid":
        return DensityGrid(self.origin, self.cell_size, values)


def grid_project(points, spec: GridSpec, mode: str = "count") -> DensityGrid:
    """Top-down histogram of 2D world points on ``spec``.

    ``mode="normalized"`` divides by the number of input points, so a grid
    that covers every point sums to one. Points outside the grid are dropped.
    Empty input in normalized mode returns an all-zero grid flagged
    ``degenerate``.
    """
    if mode not in ("count", "normalized"):
        raise ValueError(f"unknown mode {mode!r}")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    rows, cols = spec.shape
    idx = spec.cell_index(pts)
    ok = (idx[:, 0] >= 0) & (idx[:, 0] < rows) & (idx[:, 1] >= 0) & (idx[:, 1] < cols)
    flat = idx[ok, 0] * cols + idx[ok, 1]
    counts = np.bincount(flat, minlength=rows * cols).astype(float).reshape(rows, cols)
    if mode == "count":
        return DensityGrid(spec.origin, spec.cell_size, counts)
    if len(pts) == 0:
        return DensityGrid(spec.origin, spec.cell_size, counts, degenerate=True)
    return DensityGrid(spec.origin, spec.cell_size, counts / len(pts))


def signed_area(corners) -> float:
    c = np.asarray(corners, dtype=float)
    x, y = c[:, 0], c[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-12 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12 and \
            min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12

    o1, o2, o3, o4 = orient(p1, p2, q1), orient(p1, p2, q2), orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return (o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2)) or \
        (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2))


@dataclass(frozen=True)
class RoomPolygon:
    """Counterclockwise corner loop in world (x, z)."""

    corners: np.ndarray
    room_id: int = 0

    def __post_init__(self):
        c = _frozen(self.corners)
        if c.ndim != 2 or c.shape[1] != 2 or len(c) < 3:
            raise ValueError("a room polygon needs at least 3 (x, z) corners")
        if signed_area(c) <= 0:
            raise ValueError("room polygon corners must be counterclockwise with positive area")
        object.__setattr__(self, "corners", c)

    def __len__(self) -> int:
        return len(self.corners)

    @property
    def area(self) -> float:
        return signed_area(self.corners)

    def is_simple(self) -> bool:
        n = len(self.corners)
        c = self.corners
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(c[i], c[(i + 1) % n], c[j], c[(j + 1) % n]):
                    return False
        return True

    def contains(self, point) -> bool:
        return point_in_polygon(point, self)


def points_in_polygon(points, corners, eps: float = 1e-9) -> np.ndarray:
    """Vectorized even-odd containment; points on an edge count as inside."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    c = np.asarray(corners, dtype=float)
    out = np.zeros(len(pts), dtype=bool)
    a = c
    b = np.roll(c, -1, axis=0)
    chunk = max(1, 2_000_000 // max(len(c), 1))
    for lo in range(0, len(pts), chunk):
        px = pts[lo:lo + chunk, 0:1]
        py = pts[lo:lo + chunk, 1:2]
        ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
        straddle = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
        crossings = np.count_nonzero(straddle & (px < x_cross), axis=1)
        inside = crossings % 2 == 1
        # boundary: collinear with an edge and within its bounding box
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        seg_len = np.hypot(bx - ax, by - ay)
        on_line = np.abs(cross) <= eps * np.maximum(seg_len, 1.0)
        in_box = (px >= np.minimum(ax, bx) - eps) & (px <= np.maximum(ax, bx) + eps) & \
                 (py >= np.minimum(ay, by) - eps) & (py <= np.maximum(ay, by) + eps)
        on_edge = np.any(on_line & in_box, axis=1)
        out[lo:lo + chunk] = inside | on_edge
    return out


def point_in_polygon(p, poly) -> bool:
    corners = poly.corners if isinstance(poly, RoomPolygon) else poly
    return bool(points_in_polygon(np.asarray(p, dtype=float).reshape(1, 2), corners)[0])


def rasterize_polygon(corners, spec: GridSpec) -> np.ndarray:
    """Boolean mask of cells whose centers fall inside the polygon."""
    centers = spec.cell_centers().reshape(-1, 2)
    return points_in_polygon(centers, corners).reshape(spec.shape)


def polygon_iou(a: RoomPolygon, b: RoomPolygon, resolution: float = 0.02) -> float:
    """IoU of two polygons, rasterized by cell-center sampling on a shared grid."""
    both = np.vstack([a.corners, b.corners])
    spec = GridSpec.covering(both, resolution, margin_cells=1)
    ma = rasterize_polygon(a.corners, spec)
    mb = rasterize_polygon(b.corners, spec)
    union = np.count_nonzero(ma | mb)
    if union == 0:
        return 0.0
    return np.count_nonzero(ma & mb) / union
