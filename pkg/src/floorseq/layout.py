"""Equirectangular floor boundary -> camera-frame points -> world registration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Frame, LayoutBoundary, Pose


def column_azimuths(width: int) -> np.ndarray:
    """Azimuth of each image column, uniform over [-pi, pi)."""
    return 2.0 * np.pi * np.arange(width) / width - np.pi


@dataclass(frozen=True)
class RawLayout:
    """Floor-boundary elevations for one panorama.

    ``phi[j]`` is the angle *below* the horizon of the floor boundary in
    column j, so every valid value lies strictly inside (0, pi/2).
    """

    phi: np.ndarray
    wall_corner_columns: tuple[int, ...] = ()

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.ndim != 1 or len(phi) == 0:
            raise ValueError("phi must be a non-empty 1D sequence")
        bad = np.flatnonzero(~((phi > 0.0) & (phi < np.pi / 2)))
        if len(bad):
            j = int(bad[0])
            raise ValueError(f"phi[{j}] = {phi[j]!r} is outside (0, pi/2)")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "wall_corner_columns", tuple(sorted(int(c) for c in self.wall_corner_columns)))

    @property
    def image_width(self) -> int:
        return len(self.phi)


def project_boundary(raw: RawLayout, h: float = 1.0) -> LayoutBoundary:
    """Lift each column's floor boundary onto the plane y = -h in the camera frame."""
    if h <= 0:
        raise ValueError("camera height must be positive")
    theta = column_azimuths(raw.image_width)
    rho = h * np.cos(raw.phi) / np.sin(raw.phi)
    pts = np.column_stack([rho * np.sin(theta), np.full_like(rho, -h), rho * np.cos(theta)])
    return LayoutBoundary(pts, raw.wall_corner_columns, Frame.CAMERA)


def register_points(points: np.ndarray, pose: Pose, s: float) -> np.ndarray:
    return points @ pose.rotation.T + s * pose.translation


def register_boundary(boundary: LayoutBoundary, pose: Pose, s: float) -> LayoutBoundary:
    """Map camera-frame boundary points to the world: R x + s t."""
    if s <= 0:
        raise ValueError("odometry scale must be positive")
    return LayoutBoundary(register_points(boundary.points, pose, s), boundary.wall_splits, Frame.WORLD,
                          boundary.columns)


@dataclass(frozen=True)
class Keyframe:
    """One timestep of input: odometry pose plus the raw 360-layout."""

    index: int
    pose: Pose
    raw: RawLayout

    def camera_boundary(self, h: float = 1.0) -> LayoutBoundary:
        return project_boundary(self.raw, h)
