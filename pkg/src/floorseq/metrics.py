"""Corner and room scores for a predicted floor plan, plus pose alignment to real scale."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import DegenerateInputError, RoomPolygon, polygon_iou

IOU_THRESHOLDS = (0.3, 0.5, 0.7)


@dataclass(frozen=True)
class Similarity:
    """x -> scale * R x + t in the plane."""

    rotation: np.ndarray
    translation: np.ndarray
    scale: float

    @property
    def angle(self) -> float:
        return float(np.arctan2(self.rotation[1, 0], self.rotation[0, 0]))

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return self.scale * p @ self.rotation.T + self.translation

    def apply_polygon(self, poly: RoomPolygon) -> RoomPolygon:
        return RoomPolygon(self.apply(poly.corners), poly.room_id)


def align_to_ground_truth(pred_positions, gt_positions) -> Similarity:
    """Least-squares similarity mapping predicted 2D positions onto ground truth (Umeyama).

    Raises:
        DegenerateInputError: fewer than 3 pairs, or all predicted positions coincide.
    """
    X = np.asarray(pred_positions, dtype=float).reshape(-1, 2)
    Y = np.asarray(gt_positions, dtype=float).reshape(-1, 2)
    if len(X) != len(Y):
        raise ValueError("pose lists differ in length")
    if len(X) < 3:
        raise DegenerateInputError(f"need at least 3 pose pairs, got {len(X)}")
    mx, my = X.mean(axis=0), Y.mean(axis=0)
    Xc, Yc = X - mx, Y - my
    var_x = float((Xc ** 2).sum()) / len(X)
    if var_x < 1e-12:
        raise DegenerateInputError("predicted positions are rank deficient")
    cov = Yc.T @ Xc / len(X)
    U, S, Vt = np.linalg.svd(cov)
    D = np.eye(2)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        D[1, 1] = -1.0
    R = U @ D @ Vt
    c = float(np.trace(np.diag(S) @ D)) / var_x
    return Similarity(R, my - c * R @ mx, c)


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0


def scene_bounds(*corner_sets, margin: float = 0.05) -> tuple[np.ndarray, np.ndarray]:
    """Square box around all corners, widened by ``margin`` of its side on every edge."""
    pts = np.vstack([np.asarray(c, dtype=float).reshape(-1, 2) for c in corner_sets])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    side = max(float(np.max(hi - lo)), 1e-9)
    center = (lo + hi) / 2
    half = side * (0.5 + margin)
    return center - half, center + half


def _to_pixels(points, bounds, size: int) -> np.ndarray:
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    return (np.asarray(points, dtype=float).reshape(-1, 2) - lo) / (hi - lo) * size


def corner_counts(pred_corners, gt_corners, bounds=None, size: int = 256, gate_px: float = 10.0) -> MatchCounts:
    """One-to-one corner matching on a ``size`` x ``size`` raster of the scene.

    Pairs are claimed globally in order of increasing pixel distance, so each
    ground truth keeps its closest prediction; pairs beyond ``gate_px`` never match.
    """
    pred = np.asarray(pred_corners, dtype=float).reshape(-1, 2)
    gt = np.asarray(gt_corners, dtype=float).reshape(-1, 2)
    if len(pred) == 0 or len(gt) == 0:
        return MatchCounts(0, len(pred), len(gt))
    if bounds is None:
        bounds = scene_bounds(pred, gt)
    pp, gp = _to_pixels(pred, bounds, size), _to_pixels(gt, bounds, size)
    dist = np.linalg.norm(gp[:, None, :] - pp[None, :, :], axis=2)
    gi, pi = np.nonzero(dist <= gate_px)
    order = np.lexsort((pi, gi, dist[gi, pi]))
    used_g, used_p = set(), set()
    for k in order:
        g, p = int(gi[k]), int(pi[k])
        if g in used_g or p in used_p:
            continue
        used_g.add(g)
        used_p.add(p)
    tp = len(used_g)
    return MatchCounts(tp, len(pred) - tp, len(gt) - tp)


def corner_metric(pred_corners, gt_corners, bounds=None) -> tuple[float, float]:
    """(recall, precision) of predicted corners against ground truth."""
    m = corner_counts(pred_corners, gt_corners, bounds)
    return m.recall, m.precision


def iou_matrix(pred_rooms: Sequence[RoomPolygon], gt_rooms: Sequence[RoomPolygon],
               resolution: float = 0.02) -> np.ndarray:
    M = np.zeros((len(pred_rooms), len(gt_rooms)))
    for i, p in enumerate(pred_rooms):
        for j, g in enumerate(gt_rooms):
            M[i, j] = polygon_iou(p, g, resolution)
    return M


def greedy_room_matches(ious: np.ndarray) -> list[tuple[int, int, float]]:
    """One-to-one (pred, gt, iou) pairs picked in descending IoU order; zero-overlap pairs never match."""
    pairs = [(float(ious[i, j]), i, j) for i in range(ious.shape[0]) for j in range(ious.shape[1]) if ious[i, j] > 0]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_p, used_g, out = set(), set(), []
    for v, i, j in pairs:
        if i in used_p or j in used_g:
            continue
        used_p.add(i)
        used_g.add(j)
        out.append((i, j, v))
    return out


def room_counts(pred_rooms, gt_rooms, iou_threshold: float, ious: np.ndarray | None = None) -> MatchCounts:
    if not 0 < iou_threshold < 1:
        raise ValueError("iou_threshold must lie in (0, 1)")
    if ious is None:
        ious = iou_matrix(pred_rooms, gt_rooms)
    tp = sum(1 for _, _, v in greedy_room_matches(ious) if v >= iou_threshold)
    return MatchCounts(tp, len(pred_rooms) - tp, len(gt_rooms) - tp)


def room_metric(pred_rooms, gt_rooms, iou_threshold: float) -> tuple[float, float]:
    """(recall, precision) of predicted rooms at the given IoU threshold."""
    m = room_counts(pred_rooms, gt_rooms, iou_threshold)
    return m.recall, m.precision


@dataclass
class EvalReport:
    corner_recall: float
    corner_precision: float
    room_recall: dict[float, float]
    room_precision: dict[float, float]
    room_iou: list[tuple[int, int, float]] = field(default_factory=list)  # (pred id, gt id, IoU)
    runtime_per_room: float = 0.0
    corner_counts: MatchCounts | None = None

    def to_text(self) -> str:
        lines = [f"corner_recall={self.corner_recall:.6f}", f"corner_precision={self.corner_precision:.6f}"]
        if self.corner_counts is not None:
            c = self.corner_counts
            lines.append(f"corner_tp={c.tp}")
            lines.append(f"corner_fp={c.fp}")
            lines.append(f"corner_fn={c.fn}")
        for t in sorted(self.room_recall):
            lines.append(f"room_recall@{t:g}={self.room_recall[t]:.6f}")
            lines.append(f"room_precision@{t:g}={self.room_precision[t]:.6f}")
        lines.append(f"runtime_per_room={self.runtime_per_room:.6f}")
        for p, g, v in self.room_iou:
            lines.append(f"room_iou[{p},{g}]={v:.6f}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> dict[str, float]:
        out = {}
        for line in text.splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                out[key] = float(value)
        return out


def evaluate(pred_rooms: Sequence[RoomPolygon], gt_rooms: Sequence[RoomPolygon],
             alignment: Similarity | None = None, runtime_per_room: float = 0.0,
             thresholds: Sequence[float] = IOU_THRESHOLDS) -> EvalReport:
    """Score predicted rooms, optionally mapping them into the ground-truth frame first."""
    if alignment is not None:
        pred_rooms = [alignment.apply_polygon(r) for r in pred_rooms]
    pc = np.vstack([r.corners for r in pred_rooms]) if pred_rooms else np.zeros((0, 2))
    gc = np.vstack([r.corners for r in gt_rooms]) if gt_rooms else np.zeros((0, 2))
    cc = corner_counts(pc, gc)
    ious = iou_matrix(pred_rooms, gt_rooms)
    rec, prec = {}, {}
    for t in thresholds:
        m = room_counts(pred_rooms, gt_rooms, t, ious)
        rec[t], prec[t] = m.recall, m.precision
    table = [(pred_rooms[i].room_id, gt_rooms[j].room_id, v) for i, j, v in greedy_room_matches(ious)]
    return EvalReport(cc.recall, cc.precision, rec, prec, table, runtime_per_room, cc)
