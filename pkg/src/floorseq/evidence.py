"""Rasterized room evidence (wall density M_P, room mask M_H) for shape optimization."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .geometry import DensityGrid, GridSpec, RoomPolygon, grid_project, rasterize_polygon
from .shape import NoRoomError, largest_component


def evidence_frame(lo, hi, grid_size: int, margin: float = 0.1) -> GridSpec:
    """Square ``grid_size`` grid centred on the box [lo, hi]; the box fills 1 - 2*margin of the side."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    side = float(np.max(hi - lo)) / (1.0 - 2.0 * margin)
    center = (lo + hi) / 2
    return GridSpec(tuple(center - side / 2), side / grid_size, (grid_size, grid_size))


def wall_density(points, spec: GridSpec, percentile: float = 95.0) -> DensityGrid:
    """Wall-point counts scaled by the given percentile of the occupied cells, clipped to [0, 1]."""
    counts = grid_project(np.asarray(points, dtype=float).reshape(-1, 2), spec, "count").values
    occupied = counts[counts > 0]
    if len(occupied) == 0:
        return DensityGrid(spec.origin, spec.cell_size, np.zeros(spec.shape))
    ref = max(np.percentile(occupied, percentile), 1.0)
    return DensityGrid(spec.origin, spec.cell_size, np.clip(counts / ref, 0.0, 1.0))


def binary_mask(H: DensityGrid, threshold: float = 0.5) -> np.ndarray:
    return largest_component(H.values >= threshold)


def interior_mask(mask: np.ndarray, wall_cells: int = 1) -> np.ndarray:
    """Room mask without its outer ``wall_cells`` ring, so the walls themselves are not interior."""
    inner = ndimage.binary_erosion(mask, iterations=wall_cells) if wall_cells > 0 else mask
    return largest_component(inner) if inner.any() else mask.astype(bool)


def room_evidence(H: DensityGrid, wall_points, grid_size: int = 96, threshold: float = 0.5,
                  margin: float = 0.1, wall_cells: int = 1) -> tuple[DensityGrid, DensityGrid]:
    """M_P and M_H for a room from its density function and its valid wall points."""
    mask = binary_mask(H, threshold)
    if not mask.any():
        raise NoRoomError("room density never reaches the membership threshold")
    cells = np.argwhere(mask)
    lo = np.asarray(H.origin) + cells.min(axis=0) * H.cell_size
    hi = np.asarray(H.origin) + (cells.max(axis=0) + 1) * H.cell_size
    spec = evidence_frame(lo, hi, grid_size, margin)
    centers = spec.cell_centers().reshape(-1, 2)
    mh = DensityGrid(H.origin, H.cell_size, mask.astype(float)).sample(centers).reshape(spec.shape)
    M_H = DensityGrid(spec.origin, spec.cell_size,
                      interior_mask(largest_component(mh > 0.5), wall_cells).astype(float))
    pts = np.vstack([np.asarray(p).reshape(-1, 2) for p in wall_points]) if len(wall_points) else np.zeros((0, 2))
    return wall_density(pts, spec), M_H


def polygon_evidence(poly: RoomPolygon, grid_size: int = 96, margin: float = 0.1,
                     samples_per_cell: int = 4, wall_cells: int = 1) -> tuple[DensityGrid, DensityGrid]:
    """Noise-free evidence for a known polygon: dense wall samples and its filled mask."""
    c = poly.corners
    spec = evidence_frame(c.min(axis=0), c.max(axis=0), grid_size, margin)
    pts = []
    for a, b in zip(c, np.roll(c, -1, axis=0)):
        n = max(2, int(np.ceil(np.hypot(*(b - a)) / spec.cell_size * samples_per_cell)))
        t = np.linspace(0.0, 1.0, n, endpoint=False)[:, None]
        pts.append(a + t * (b - a))
    M_P = wall_density(np.vstack(pts), spec)
    M_H = DensityGrid(spec.origin, spec.cell_size,
                      interior_mask(rasterize_polygon(c, spec), wall_cells).astype(float))
    return M_P, M_H
