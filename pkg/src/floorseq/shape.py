"""Room shape optimization: corner polygons as minimum-cost containing cycles.

A room's evidence is rasterized on a square grid: ``M_P`` (wall evidence in
[0, 1]) and ``M_H`` (binary room mask). Graph nodes are grid cells, every
directed edge p -> q costs

    w_ori * L_ori + w_plane * sum(1 - M_P) + w_mask * sum(M_H) + w_complex

with the sums over the cells of the rasterized segment (p excluded, q
included). A cut along a ray from an interior anchor forces the optimal
cycle to wind once, counterclockwise, around the room.

The iterative solver runs a coarse round with a capped edge length, then
re-solves at finer grids using only cells near the previous corners.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse.csgraph import dijkstra

from .geometry import DensityGrid, GridSpec, RoomPolygon, signed_area

log = logging.getLogger(__name__)


class NoRoomError(ValueError):
    pass


class DegenerateRoomWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpaWeights:
    ori: float = 1.0
    plane: float = 1.0
    mask: float = 2.0
    complex: float = 5.0

    def __post_init__(self):
        if min(self.ori, self.plane, self.mask) < 0:
            raise ValueError("SPA weights must be nonnegative")
        if self.complex <= 0:
            raise ValueError("the complexity weight must be positive")

    def scaled(self, k: float) -> "SpaWeights":
        return SpaWeights(self.ori * k, self.plane * k, self.mask * k, self.complex * k)


@dataclass(frozen=True)
class SpaRound:
    grid_size: int
    max_edge_length: int | None = None
    neighborhood_radius: int = 5


@dataclass(frozen=True)
class IspaSchedule:
    rounds: tuple[SpaRound, ...]
    band_width: int = 2
    max_skip: int | None = 4
    wall_dilation: int = 1

    def __post_init__(self):
        if not self.rounds:
            raise ValueError("schedule needs at least one round")
        if any(r.max_edge_length is not None for r in self.rounds[1:]):
            raise ValueError("only the first round may cap the edge length")

    @classmethod
    def default(cls, grid_sizes: Sequence[int] = (64, 96, 96), max_edge_length: int = 8,
                neighborhood_radius: int = 5, max_skip: int | None = 4) -> "IspaSchedule":
        rounds = [SpaRound(grid_sizes[0], max_edge_length, neighborhood_radius)]
        rounds += [SpaRound(g, None, neighborhood_radius) for g in grid_sizes[1:]]
        return cls(tuple(rounds), max_skip=max_skip)

    @classmethod
    def single(cls, grid_size: int, max_edge_length: int | None = None) -> "IspaSchedule":
        return cls((SpaRound(grid_size, max_edge_length),))


# --- maps --------------------------------------------------------------------

@dataclass(frozen=True)
class RoomMaps:
    """Evidence on one square solver grid. Cell (u, v) center maps to world origin + (u+.5, v+.5)*cell."""

    M_P: np.ndarray
    M_H: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    cell_size: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.M_H.shape

    def to_world(self, cells) -> np.ndarray:
        c = np.asarray(cells, dtype=float).reshape(-1, 2)
        return np.asarray(self.origin) + (c + 0.5) * self.cell_size

    def to_cells(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.floor((p - np.asarray(self.origin)) / self.cell_size).astype(int)


def largest_component(mask: np.ndarray) -> np.ndarray:
    labels, n = ndimage.label(mask)
    if n <= 1:
        return mask.astype(bool)
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, n + 1))
    return labels == (1 + int(np.argmax(sizes)))


def round_maps(M_P: DensityGrid, M_H: DensityGrid, grid_size: int, wall_dilation: int = 0) -> RoomMaps:
    """Resample room evidence onto a ``grid_size`` square grid spanning the input extent.

    ``wall_dilation`` widens M_P by a max filter of that many cells so that
    lattice segments along slanted walls stay on the evidence.
    """
    maps = _resample(M_P, M_H, grid_size)
    if wall_dilation > 0:
        size = 2 * wall_dilation + 1
        maps = RoomMaps(ndimage.maximum_filter(maps.M_P, size=size, mode="constant"), maps.M_H,
                        maps.origin, maps.cell_size)
    return maps


def _resample(M_P: DensityGrid, M_H: DensityGrid, grid_size: int) -> RoomMaps:
    if M_P.values.shape != M_H.values.shape:
        raise ValueError("M_P and M_H must share one grid")
    rows, cols = M_H.values.shape
    if rows == cols == grid_size:
        return RoomMaps(np.asarray(M_P.values, dtype=float), M_H.values > 0.5, M_H.origin, M_H.cell_size)
    side = max(rows, cols) * M_H.cell_size
    cell = side / grid_size
    spec = GridSpec(M_H.origin, cell, (grid_size, grid_size))
    centers = spec.cell_centers().reshape(-1, 2)
    mask = (M_H.sample(centers) > 0.5).reshape(grid_size, grid_size)
    mp = M_P.sample(centers).reshape(grid_size, grid_size)
    if cell > M_P.cell_size:
        # downsampling: keep thin wall evidence by max-pooling
        src = M_P.spec.cell_centers().reshape(-1, 2)
        idx = spec.cell_index(src)
        ok = (idx >= 0).all(axis=1) & (idx < grid_size).all(axis=1)
        np.maximum.at(mp, (idx[ok, 0], idx[ok, 1]), M_P.values.reshape(-1)[ok])
    return RoomMaps(np.clip(mp, 0.0, 1.0), largest_component(mask), spec.origin, cell)


def node_band(mask: np.ndarray, width: int = 2) -> np.ndarray:
    """Cells within Chebyshev distance ``width`` of the mask's boundary cells."""
    interior = ndimage.binary_erosion(mask, structure=ndimage.generate_binary_structure(2, 1), border_value=0)
    boundary = mask & ~interior
    return ndimage.binary_dilation(boundary, structure=np.ones((2 * width + 1, 2 * width + 1), bool))


def find_anchor(mask: np.ndarray) -> tuple[int, int]:
    """Mask cell farthest from the mask boundary; ties go to the lexicographically smallest cell."""
    if not mask.any():
        raise NoRoomError("room mask is empty")
    dist = ndimage.distance_transform_edt(np.pad(mask, 1))[1:-1, 1:-1]
    u, v = np.unravel_index(int(np.argmax(dist)), mask.shape)
    return int(u), int(v)


# --- edge costs ----------------------------------------------------------------

def segment_cells(p, q) -> np.ndarray:
    """Cells of the rasterized segment p -> q, excluding p and including q."""
    p = np.asarray(p, dtype=np.int64)
    d = np.asarray(q, dtype=np.int64) - p
    k = int(np.abs(d).max())
    i = np.arange(1, k + 1)[:, None]
    return p + (2 * i * d + k) // (2 * k)


def orientation_deviation(angles, thetas) -> np.ndarray:
    """Smallest folded deviation in [0, pi/2] between edge directions and wall directions."""
    angles = np.asarray(angles, dtype=float)
    if len(thetas) == 0:
        return np.zeros_like(angles)
    dev = np.abs(angles[..., None] - np.asarray(thetas, dtype=float)) % np.pi
    dev = np.minimum(dev, np.pi - dev)
    return dev.min(axis=-1)


def edge_costs(P: np.ndarray, Q: np.ndarray, M_P: np.ndarray, M_H: np.ndarray,
               thetas: Sequence[float], w: SpaWeights, chunk: int = 1 << 16) -> np.ndarray:
    """Vectorized edge cost for the directed edges P[i] -> Q[i] (integer cell pairs)."""
    P = np.asarray(P, dtype=np.int64).reshape(-1, 2)
    Q = np.asarray(Q, dtype=np.int64).reshape(-1, 2)
    D = Q - P
    K = np.abs(D).max(axis=1)
    if np.any(K == 0):
        raise ValueError("edges need distinct endpoints")
    one_minus = 1.0 - M_P.astype(float)
    occ = M_H.astype(float)
    plane = np.empty(len(P))
    inside = np.empty(len(P))
    order = np.argsort(K, kind="stable")
    for lo in range(0, len(order), chunk):
        sel = order[lo:lo + chunk]
        k = K[sel]
        kmax = int(k.max())
        i = np.arange(1, kmax + 1)
        valid = i[None, :] <= k[:, None]
        num_u = 2 * i[None, :] * D[sel, 0:1] + k[:, None]
        num_v = 2 * i[None, :] * D[sel, 1:2] + k[:, None]
        cu = P[sel, 0:1] + num_u // (2 * k[:, None])
        cv = P[sel, 1:2] + num_v // (2 * k[:, None])
        cu = np.where(valid, cu, 0)
        cv = np.where(valid, cv, 0)
        plane[sel] = np.where(valid, one_minus[cu, cv], 0.0).sum(axis=1)
        inside[sel] = np.where(valid, occ[cu, cv], 0.0).sum(axis=1)
    ori = orientation_deviation(np.arctan2(D[:, 1], D[:, 0]), thetas)
    return w.ori * ori + w.plane * plane + w.mask * inside + w.complex


def edge_cost(p, q, M_P, M_H, thetas: Sequence[float], w: SpaWeights = SpaWeights()) -> float:
    """Cost of the single directed edge p -> q."""
    mp = M_P.values if isinstance(M_P, DensityGrid) else np.asarray(M_P)
    mh = M_H.values if isinstance(M_H, DensityGrid) else np.asarray(M_H)
    if tuple(p) == tuple(q):
        raise ValueError("p and q must differ")
    return float(edge_costs(np.array([p]), np.array([q]), mp, mh, thetas, w)[0])


# --- graph -------------------------------------------------------------------

@dataclass
class ShapeGraph:
    nodes: np.ndarray  # (n, 2) cells
    src: np.ndarray  # edge tails (node indices)
    dst: np.ndarray  # edge heads
    weight: np.ndarray
    anchor: tuple[int, int]
    crossing: np.ndarray = field(default=None)  # +1 upward through the cut, -1 downward, 0 none
    maps: RoomMaps | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @property
    def containment_cut(self) -> np.ndarray:
        """Indices of edges that cross the cut ray."""
        return np.flatnonzero(self.crossing != 0)


def ray_crossing(P: np.ndarray, Q: np.ndarray, anchor: tuple[int, int]) -> np.ndarray:
    """+1 where p -> q crosses the cut ray upward, -1 downward, 0 otherwise.

    The ray starts at the anchor and runs towards +u just below the anchor's
    row, so a cell on the anchor row counts as being above it.
    """
    ua, va = anchor
    above_p = P[:, 1] >= va
    above_q = Q[:, 1] >= va
    up = ~above_p & above_q
    down = above_p & ~above_q
    lo = np.where(up[:, None], P, Q)
    hi = np.where(up[:, None], Q, P)
    # sign of (u_intersection - ua) on the anchor row, scaled by (hi.v - lo.v) > 0
    du = hi[:, 0] - lo[:, 0]
    side = (lo[:, 0] - ua) * (hi[:, 1] - lo[:, 1]) + (va - lo[:, 1]) * du
    # an exact hit at the anchor moves by -du/dv once the ray drops below the row
    hits = (side > 0) | ((side == 0) & (du <= 0))
    return np.where(up & hits, 1, np.where(down & hits, -1, 0)).astype(np.int8)


def apply_containment(graph: ShapeGraph, M_H: np.ndarray | None = None) -> ShapeGraph:
    """Locate the anchor and classify every edge against the cut ray."""
    if M_H is not None:
        graph.anchor = find_anchor(M_H)
    graph.crossing = ray_crossing(graph.nodes[graph.src], graph.nodes[graph.dst], graph.anchor)
    return graph


def _node_index(nodes: np.ndarray, shape) -> np.ndarray:
    grid = np.full(shape, -1, dtype=np.int64)
    grid[nodes[:, 0], nodes[:, 1]] = np.arange(len(nodes))
    return grid


def _limited_edges(nodes: np.ndarray, shape, L: int):
    """All ordered node pairs within Chebyshev distance L."""
    index = _node_index(nodes, shape)
    src, dst = [], []
    for du in range(-L, L + 1):
        for dv in range(-L, L + 1):
            if du == 0 and dv == 0:
                continue
            qu, qv = nodes[:, 0] + du, nodes[:, 1] + dv
            ok = (qu >= 0) & (qu < shape[0]) & (qv >= 0) & (qv < shape[1])
            ids = np.full(len(nodes), -1, dtype=np.int64)
            ids[ok] = index[qu[ok], qv[ok]]
            keep = ids >= 0
            src.append(np.flatnonzero(keep))
            dst.append(ids[keep])
    return np.concatenate(src), np.concatenate(dst)


def _all_pairs(n: int):
    src, dst = np.divmod(np.arange(n * n), n)
    keep = src != dst
    return src[keep], dst[keep]


def _neighborhood_edges(nodes: np.ndarray, groups: list[np.ndarray], max_skip: int | None):
    """Edges from each corner neighborhood to the next ones in cyclic corner order."""
    K = len(groups)
    reach = K - 1 if max_skip is None else min(max_skip, K - 1)
    src, dst = [], []
    for i in range(K):
        for k in range(1, reach + 1):
            j = (i + k) % K
            a, b = groups[i], groups[j]
            s = np.repeat(a, len(b))
            d = np.tile(b, len(a))
            keep = s != d
            src.append(s[keep])
            dst.append(d[keep])
    src, dst = np.concatenate(src), np.concatenate(dst)
    key = np.unique(src * len(nodes) + dst)
    return np.divmod(key, len(nodes))


def build_graph(maps: RoomMaps, thetas: Sequence[float], w: SpaWeights, round_spec: SpaRound,
                previous_corners: np.ndarray | None = None, band_width: int = 2,
                max_skip: int | None = 4) -> ShapeGraph:
    """Nodes, weighted edges, and containment cut for one SPA round.

    Without ``previous_corners`` the nodes are the band around the mask
    boundary, joined within ``max_edge_length`` (or all pairs when unset).
    With them, the nodes are band cells near each previous corner and edges
    run from each corner's neighborhood to the following ones.
    """
    mask = maps.M_H
    if not mask.any():
        raise NoRoomError("room mask is empty")
    band = node_band(mask, band_width)
    if previous_corners is None:
        nodes = np.argwhere(band)
        if round_spec.max_edge_length is None:
            src, dst = _all_pairs(len(nodes))
        else:
            src, dst = _limited_edges(nodes, mask.shape, round_spec.max_edge_length)
    else:
        r = round_spec.neighborhood_radius
        member = []
        for c in np.asarray(previous_corners, dtype=int):
            box = np.zeros_like(band)
            box[max(c[0] - r, 0):c[0] + r + 1, max(c[1] - r, 0):c[1] + r + 1] = True
            cells = np.argwhere(box & band)
            if len(cells) == 0:
                cells = np.argwhere(box)
            member.append(cells)
        nodes = np.unique(np.vstack(member), axis=0)
        index = _node_index(nodes, mask.shape)
        groups = [index[m[:, 0], m[:, 1]] for m in member]
        src, dst = _neighborhood_edges(nodes, groups, max_skip)
    weight = edge_costs(nodes[src], nodes[dst], maps.M_P, mask, thetas, w)
    graph = ShapeGraph(nodes, src, dst, weight, find_anchor(mask), maps=maps)
    return apply_containment(graph)


# --- shortest containing cycle ------------------------------------------------

@dataclass
class CycleResult:
    cost: float
    cells: np.ndarray  # (k, 2) corner cells in traversal order
    edges: int


def shortest_cycle(graph: ShapeGraph, batch: int = 64) -> CycleResult:
    """Minimum-cost cycle that crosses the cut exactly once, upward.

    Each tail p of an upward crossing edge gets a start twin carrying only
    the crossing edges; the cycle is the shortest path from that twin back to
    p in the graph with every crossing edge removed.
    """
    n = graph.n_nodes
    cross = graph.crossing
    up = np.flatnonzero(cross == 1)
    if len(up) == 0:
        raise NoRoomError("no edge crosses the containment cut")
    starts = np.unique(graph.src[up])
    twin = np.full(n, -1, dtype=np.int64)
    twin[starts] = n + np.arange(len(starts))
    keep = cross == 0
    rows = np.concatenate([graph.src[keep], twin[graph.src[up]]])
    cols = np.concatenate([graph.dst[keep], graph.dst[up]])
    vals = np.concatenate([graph.weight[keep], graph.weight[up]])
    total = n + len(starts)
    csr = sparse.csr_matrix((vals, (rows, cols)), shape=(total, total))

    best_cost = np.inf
    candidates = []  # (cost, start node, predecessor row)
    for lo in range(0, len(starts), batch):
        chunk = starts[lo:lo + batch]
        limit = best_cost * (1 + 1e-9) + 1e-9 if np.isfinite(best_cost) else np.inf
        dist, pred = dijkstra(csr, directed=True, indices=twin[chunk], return_predecessors=True, limit=limit)
        closing = dist[np.arange(len(chunk)), chunk]
        for k in np.flatnonzero(np.isfinite(closing)):
            c = float(closing[k])
            if c <= best_cost + 1e-9:
                candidates.append((c, int(chunk[k]), pred[k].copy(), int(twin[chunk[k]])))
                best_cost = min(best_cost, c)
    if not np.isfinite(best_cost):
        raise NoRoomError("no cycle encloses the anchor")

    best = None
    for c, p, pred, src in candidates:
        if c > best_cost + 1e-9:
            continue
        path = [p]
        node = p
        while True:
            node = int(pred[node])
            if node == src:
                break
            path.append(node)
        path.reverse()  # q ... p, with p closing the loop
        path = [p] + path[:-1]
        key = (len(path), p)
        if best is None or key < best[0]:
            best = (key, c, path)
    _, cost, path = best
    return CycleResult(cost, graph.nodes[np.array(path)], len(path))


def cycle_cost(cells: np.ndarray, maps: RoomMaps, thetas, w: SpaWeights) -> float:
    """Sum of edge costs around a closed loop of cells."""
    cells = np.asarray(cells)
    return float(edge_costs(cells, np.roll(cells, -1, axis=0), maps.M_P, maps.M_H, thetas, w).sum())


# --- polygon post-processing ----------------------------------------------------

def merge_collinear(corners: np.ndarray, tol_deg: float = 1.0) -> np.ndarray:
    """Drop corners whose adjacent edges turn by less than ``tol_deg``, and repeated points."""
    pts = [np.asarray(c, dtype=float) for c in corners]
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            u, v = b - a, c - b
            nu, nv = np.hypot(*u), np.hypot(*v)
            if nu < 1e-12 or nv < 1e-12:
                del pts[i]
                changed = True
                break
            turn = np.degrees(abs(np.arctan2(u[0] * v[1] - u[1] * v[0], u @ v)))
            if turn < tol_deg:
                del pts[i]
                changed = True
                break
    return np.array(pts)


@dataclass
class RoundTrace:
    grid_size: int
    corners: np.ndarray  # world coordinates, before collinear merging
    cost: float
    n_nodes: int
    n_edges: int
    seconds: float
    cells: np.ndarray
    maps: RoomMaps


@dataclass
class ShapeSolution:
    polygon: RoomPolygon
    rounds: list[RoundTrace]

    @property
    def cost(self) -> float:
        return self.rounds[-1].cost


def _polygon(corners: np.ndarray, room_id: int, merge: bool) -> RoomPolygon:
    pts = merge_collinear(corners) if merge else np.asarray(corners, dtype=float)
    if signed_area(pts) < 0:
        pts = pts[::-1]
    return RoomPolygon(pts, room_id)


def solve_room_detailed(M_P: DensityGrid, M_H: DensityGrid, thetas: Sequence[float],
                        w: SpaWeights = SpaWeights(), schedule: IspaSchedule | None = None,
                        room_id: int = 0, merge: bool = True) -> ShapeSolution:
    """Run every round of the schedule and keep the per-round traces."""
    schedule = IspaSchedule.default() if schedule is None else schedule
    if not np.any(M_H.values > 0.5):
        raise NoRoomError("room mask is empty")
    traces: list[RoundTrace] = []
    corners_world = None
    for r, spec in enumerate(schedule.rounds):
        t0 = time.perf_counter()
        maps = round_maps(M_P, M_H, spec.grid_size, schedule.wall_dilation)
        prev = None
        if corners_world is not None:
            prev = np.clip(maps.to_cells(corners_world), 0, spec.grid_size - 1)
        graph = build_graph(maps, thetas, w, spec, prev, schedule.band_width, schedule.max_skip)
        try:
            result = shortest_cycle(graph)
        except NoRoomError:
            if corners_world is None:
                raise
            log.warning("round %d found no containing cycle; keeping the previous corners", r)
            break
        corners_world = maps.to_world(result.cells)
        traces.append(RoundTrace(spec.grid_size, corners_world, result.cost, graph.n_nodes, graph.n_edges,
                                 time.perf_counter() - t0, result.cells, maps))
    poly = _polygon(corners_world, room_id, merge)
    final_cell = traces[-1].maps.cell_size
    if poly.area < 4 * final_cell ** 2:
        warnings.warn(f"room {room_id} polygon covers fewer than 4 cells", DegenerateRoomWarning, stacklevel=2)
    return ShapeSolution(poly, traces)


def solve_room(M_P: DensityGrid, M_H: DensityGrid, thetas: Sequence[float], w: SpaWeights = SpaWeights(),
               schedule: IspaSchedule | None = None, room_id: int = 0) -> RoomPolygon:
    """Corner polygon of one room from its wall evidence, mask, and likely wall directions."""
    return solve_room_detailed(M_P, M_H, thetas, w, schedule, room_id).polygon


# --- exhaustive reference ----------------------------------------------------

ORACLE_MAX_GRID = 24


def oracle_shortest_cycle_detailed(M_P: DensityGrid, M_H: DensityGrid, thetas: Sequence[float],
                                   w: SpaWeights = SpaWeights(), band_width: int = 2,
                                   wall_dilation: int = 1) -> CycleResult:
    """Exhaustive all-pairs search over the unrestricted single-round graph.

    Independent of :func:`shortest_cycle`: the cut graph is solved densely by
    Floyd-Warshall and the cut test is a floating-point segment/ray
    intersection.
    """
    g = max(M_H.values.shape)
    if g > ORACLE_MAX_GRID:
        raise ValueError(f"oracle refuses grids larger than {ORACLE_MAX_GRID} (got {g})")
    maps = round_maps(M_P, M_H, g, wall_dilation)
    mask = maps.M_H
    if not mask.any():
        raise NoRoomError("room mask is empty")
    nodes = np.argwhere(node_band(mask, band_width))
    n = len(nodes)
    ua, va = find_anchor(mask)
    ray_v = va - 1e-6

    P = np.repeat(nodes, n, axis=0)
    Q = np.tile(nodes, (n, 1))
    same = np.all(P == Q, axis=1)
    Wt = np.full(n * n, np.inf)
    Wt[~same] = edge_costs(P[~same], Q[~same], maps.M_P, mask, thetas, w)
    Wt = Wt.reshape(n, n)

    # segment/ray intersection in floating point
    pv, qv = P[:, 1].astype(float), Q[:, 1].astype(float)
    straddle = (pv - ray_v) * (qv - ray_v) < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ray_v - pv) / (qv - pv)
        u_hit = P[:, 0] + t * (Q[:, 0] - P[:, 0])
    crosses = (straddle & (u_hit > ua - 1e-9) & ~same).reshape(n, n)
    upward = crosses & (qv > pv).reshape(n, n)

    D = np.where(crosses, np.inf, Wt)
    np.fill_diagonal(D, 0.0)
    nxt = np.tile(np.arange(n), (n, 1))
    for k in range(n):
        alt = D[:, k:k + 1] + D[k:k + 1, :]
        better = alt < D
        D = np.where(better, alt, D)
        nxt = np.where(better, nxt[:, k:k + 1], nxt)

    pi, qi = np.nonzero(upward)
    totals = Wt[pi, qi] + D[qi, pi]
    if len(totals) == 0 or not np.isfinite(totals.min()):
        raise NoRoomError("no cycle encloses the anchor")
    k = int(np.argmin(totals))
    p, q = int(pi[k]), int(qi[k])
    path = [p, q]
    node = q
    while node != p:
        node = int(nxt[node, p])
        path.append(node)
    cells = nodes[np.array(path[:-1])]
    return CycleResult(float(totals[k]), cells, len(cells))


def oracle_shortest_cycle(M_P: DensityGrid, M_H: DensityGrid, thetas: Sequence[float],
                          w: SpaWeights = SpaWeights(), room_id: int = 0, band_width: int = 2,
                          wall_dilation: int = 1) -> RoomPolygon:
    res = oracle_shortest_cycle_detailed(M_P, M_H, thetas, w, band_width, wall_dilation)
    maps = round_maps(M_P, M_H, max(M_H.values.shape))
    return _polygon(maps.to_world(res.cells), room_id, merge=True)
