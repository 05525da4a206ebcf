"""Wall validation by RANSAC line fitting and per-room wall-orientation filtering.

Walls are vertical, so each wall subset reduces to a 2D line n . (x, z) = c.
Orientations are tracked as wall *directions* modulo pi (the direction of the
line, i.e. the normal rotated by 90 degrees); opposite walls share a family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class RansacConfig:
    max_residual: float = 0.03
    inlier_ratio_min: float = 0.9
    iterations: int = 100
    seed: int = 0


@dataclass(frozen=True)
class PlaneWallFeature:
    points: np.ndarray
    normal: np.ndarray
    distance: float
    inlier_ratio: float
    valid: bool
    offset: float = 0.0  # line is normal . p = offset

    @property
    def direction_angle(self) -> float:
        """Wall direction in [0, pi), measured in the (x, z) plane from +x towards +z."""
        return float((np.arctan2(self.normal[1], self.normal[0]) + HALF_PI) % np.pi)

    def residuals(self, points=None) -> np.ndarray:
        pts = self.points if points is None else np.asarray(points, dtype=float)
        return np.abs(pts @ self.normal - self.offset)


def _line_from_pair(a: np.ndarray, b: np.ndarray):
    d = b - a
    norm = np.hypot(d[..., 0], d[..., 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        n = np.stack([-d[..., 1], d[..., 0]], axis=-1) / norm[..., None]
    return n, np.einsum("...i,...i->...", n, a), norm


def _refit(points: np.ndarray):
    """Total least squares line through ``points``."""
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid)
    n = vt[-1]
    return n, float(n @ centroid)


def fit_wall(points, config: RansacConfig = RansacConfig(), camera=(0.0, 0.0)) -> PlaneWallFeature:
    """Fit a wall line to a boundary subset and decide whether it is reliable.

    Args:
        points: (m, 2) world (x, z) points of one wall subset.
        config: RANSAC gates. Inliers lie within ``max_residual`` of the line.
        camera: camera (x, z) at observation time; ``distance`` is measured from it.

    Returns:
        The fitted feature. Subsets with fewer than two points come back
        invalid and unfitted.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    m = len(pts)
    if m < 2:
        return PlaneWallFeature(pts, np.array([1.0, 0.0]), 0.0, 0.0, False)

    rng = np.random.default_rng(config.seed)
    pairs = rng.integers(0, m, size=(config.iterations, 2))
    a, b = pts[pairs[:, 0]], pts[pairs[:, 1]]
    n, c, length = _line_from_pair(a, b)
    usable = length > 1e-12
    if not np.any(usable):
        return PlaneWallFeature(pts, np.array([1.0, 0.0]), 0.0, 0.0, False)
    n, c = n[usable], c[usable]
    counts = (np.abs(pts @ n.T - c) <= config.max_residual).sum(axis=0)
    best = int(np.argmax(counts))
    inliers = np.abs(pts @ n[best] - c[best]) <= config.max_residual

    normal, offset = _refit(pts[inliers]) if inliers.sum() >= 2 else (n[best], float(c[best]))
    ratio = float(np.mean(np.abs(pts @ normal - offset) <= config.max_residual))
    cam = np.asarray(camera, dtype=float)
    dist = float(abs(cam @ normal - offset))
    return PlaneWallFeature(pts, normal, dist, ratio, ratio >= config.inlier_ratio_min, offset)


@dataclass(frozen=True)
class OrientationConfig:
    sigma0: float = 0.05
    lam: float = 0.02
    gate: float = np.pi / 3
    accept: float = np.pi / 10
    init_spread: float = 2 * np.pi


@dataclass(frozen=True)
class OrientationPosterior:
    mean: float
    spread: float
    observation_count: int = 1

    def __post_init__(self):
        if self.spread <= 0:
            raise ValueError("posterior spread must be positive")


def angle_diff_mod_pi(a, b):
    """Signed difference a - b of line directions, wrapped to [-pi/2, pi/2)."""
    return (np.asarray(a) - np.asarray(b) + HALF_PI) % np.pi - HALF_PI


def update_orientation(posteriors: list[OrientationPosterior], measurement: tuple[float, float],
                       config: OrientationConfig = OrientationConfig()) -> list[OrientationPosterior]:
    """Fuse one wall direction into the room's orientation posteriors.

    ``measurement`` is (direction angle, camera-to-wall distance). The first
    posterior within the gate (closest one if several) is updated by a
    Gaussian product; otherwise a new broad posterior is appended.
    """
    theta, d = measurement
    theta = float(theta) % np.pi
    sigma = config.sigma0 + config.lam * d
    out = list(posteriors)
    if out:
        gaps = np.abs([angle_diff_mod_pi(theta, p.mean) for p in out])
        k = int(np.argmin(gaps))
        if gaps[k] <= config.gate:
            p = out[k]
            fused = 1.0 / (1.0 / p.spread + 1.0 / sigma)
            # unwrap the measurement next to the prior mean before averaging
            near = p.mean + float(angle_diff_mod_pi(theta, p.mean))
            mean = fused * (p.mean / p.spread + near / sigma)
            out[k] = OrientationPosterior(float(mean % np.pi), fused, p.observation_count + 1)
            return out
    out.append(OrientationPosterior(theta, config.init_spread, 1))
    return out


def likely_orientations(posteriors, accept: float = np.pi / 10) -> list[float]:
    """Wall directions in [0, pi) whose posterior spread is below ``accept``."""
    return sorted(float(p.mean % np.pi) for p in posteriors if p.spread < accept)
