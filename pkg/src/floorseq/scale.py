"""Odometry scale recovery by entropy minimization of co-registered boundaries."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import DegenerateInputError, GridSpec, LayoutBoundary, Pose, grid_project
from .layout import register_points

log = logging.getLogger(__name__)


class ScaleUnobservableWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScaleSearchConfig:
    search_range: tuple[float, float] = (0.1, 10.0)
    step_schedule: tuple[float, ...] = (0.5, 0.1, 0.01)
    window_size: int = 10
    warmup_fraction: float = 0.2
    grid_cell_size: float = 0.1

    def __post_init__(self):
        lo, hi = self.search_range
        if not 0 < lo < hi:
            raise ValueError("search_range must satisfy 0 < s_min < s_max")
        steps = tuple(float(s) for s in self.step_schedule)
        if not steps or any(s <= 0 for s in steps) or any(b >= a for a, b in zip(steps, steps[1:])):
            raise ValueError("step_schedule must be positive and strictly decreasing")
        if self.window_size < 2:
            raise ValueError("window_size must be at least 2")
        if not 0 < self.warmup_fraction <= 1:
            raise ValueError("warmup_fraction must lie in (0, 1]")
        if self.grid_cell_size <= 0:
            raise ValueError("grid_cell_size must be positive")
        object.__setattr__(self, "search_range", (float(lo), float(hi)))
        object.__setattr__(self, "step_schedule", steps)

    def warmup_count(self, n_keyframes: int) -> int:
        return min(n_keyframes, max(self.window_size, int(np.ceil(self.warmup_fraction * n_keyframes))))


def histogram_entropy(p: np.ndarray) -> float:
    """Shannon entropy (nats) with 0 log 0 = 0."""
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def _registered_xz(boundaries: Sequence[LayoutBoundary], poses: Sequence[Pose], s: float) -> np.ndarray:
    return np.vstack([register_points(b.points, pose, s)[:, [0, 2]] for b, pose in zip(boundaries, poses)])


def window_entropy(boundaries: Sequence[LayoutBoundary], poses: Sequence[Pose], s: float,
                   cell_size: float = 0.1) -> float:
    """Entropy of the normalized top-down histogram of all boundaries registered at scale ``s``.

    The grid is re-fitted to the registered points for every ``s`` but keeps
    cells of constant size aligned to the world origin, so values are
    comparable across candidate scales.
    """
    if len(boundaries) != len(poses):
        raise ValueError("need one pose per boundary")
    if len(boundaries) < 2:
        raise ValueError("a window needs at least 2 boundaries")
    if s <= 0:
        raise ValueError("scale must be positive")
    pts = _registered_xz(boundaries, poses, s)
    if len(pts) < 2:
        raise DegenerateInputError("window has fewer than 2 boundary points")
    spec = GridSpec.covering(pts, cell_size, margin_cells=1)
    return histogram_entropy(grid_project(pts, spec, "normalized").values)


def scale_objective(boundaries: Sequence[LayoutBoundary], poses: Sequence[Pose], s: float,
                    window_size: int, cell_size: float) -> float:
    """Mean window entropy over every stride-1 window of the warm-up stream."""
    n = len(boundaries)
    if n < window_size:
        raise ValueError(f"warm-up stream has {n} keyframes, fewer than the window size {window_size}")
    vals = [window_entropy(boundaries[i:i + window_size], poses[i:i + window_size], s, cell_size)
            for i in range(n - window_size + 1)]
    return float(np.mean(vals))


def _candidates(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(np.floor((hi - lo) / step + 1e-9))
    c = lo + step * np.arange(n + 1)
    if hi - c[-1] > 1e-9:
        c = np.append(c, hi)
    return np.round(c, 10)


def _plateau_argmin(values: np.ndarray) -> int:
    """Index of the minimum; a run of exactly tied minima resolves to its middle."""
    best = values.min()
    tied = np.isclose(values, best, rtol=0.0, atol=1e-12)
    i = int(np.argmax(tied))
    j = i
    while j + 1 < len(values) and tied[j + 1]:
        j += 1
    return (i + j) // 2


@dataclass
class ScaleSearchTrace:
    levels: list[tuple[np.ndarray, np.ndarray]]
    scale: float
    observable: bool = True


def recover_scale(boundaries: Sequence[LayoutBoundary], poses: Sequence[Pose],
                  config: ScaleSearchConfig = ScaleSearchConfig(), *, trace: bool = False):
    """Coarse-to-fine linear search for the entropy-minimizing odometry scale.

    ``boundaries``/``poses`` are the warm-up keyframes (camera frame / odometry
    poses). Each level scans its bracket at that level's step, then the next
    level re-brackets to best +/- the step just used.
    """
    n = len(boundaries)
    if n < config.window_size:
        raise ValueError(f"warm-up stream has {n} keyframes, fewer than the window size {config.window_size}")
    lo, hi = config.search_range
    translations = np.array([p.translation for p in poses])
    if np.allclose(translations, 0.0, atol=1e-12):
        warnings.warn("all warm-up translations are zero; odometry scale is unobservable, returning s_min",
                      ScaleUnobservableWarning, stacklevel=2)
        result = ScaleSearchTrace([], lo, observable=False)
        return result if trace else lo

    levels = []
    best = lo
    bracket = (lo, hi)
    for level, step in enumerate(config.step_schedule):
        cands = _candidates(max(bracket[0], lo), min(bracket[1], hi), step)
        vals = np.array([scale_objective(boundaries, poses, s, config.window_size, config.grid_cell_size)
                         for s in cands])
        if level == 0 and np.allclose(vals, vals[0], rtol=0.0, atol=1e-12):
            warnings.warn("scale objective is constant over the search range; returning s_min",
                          ScaleUnobservableWarning, stacklevel=2)
            result = ScaleSearchTrace([(cands, vals)], lo, observable=False)
            return result if trace else lo
        best = float(cands[_plateau_argmin(vals)])
        levels.append((cands, vals))
        log.debug("scale level %d step %.3g -> %.4f", level, step, best)
        bracket = (best - step, best + step)
    return ScaleSearchTrace(levels, best) if trace else best
