"""Marching-squares isoline extraction for probability grids.

Cells are scanned once per level; crossings are linearly interpolated on cell
edges, computed exactly once per grid edge so that neighbouring cells share
bit-identical endpoints and segment chains join without tolerance matching.
Output polylines live in (tau, theta) coordinates: column 0 is tau (the grid's
column axis), column 1 is theta (the row axis). Closed loops repeat their
first vertex at the end; other polylines terminate on the grid boundary.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

# An edge key is ("h", i, j) for the edge from node (i, j) to (i, j+1), or
# ("v", i, j) for the edge from node (i, j) to (i+1, j).
EdgeKey = Tuple[str, int, int]


def extract_contours(grid, levels: Sequence[float]) -> List[List[np.ndarray]]:
    """Isolines of a ProbabilityGrid at each level.

    Returns one list of polylines per requested level (possibly empty, e.g.
    for a constant grid). Cells containing non-finite samples are skipped.
    """
    values = np.asarray(grid.values, dtype=float)
    tau_axis = np.asarray(grid.tau_axis, dtype=float)
    theta_axis = np.asarray(grid.theta_axis, dtype=float)
    levels = [float(lv) for lv in levels]
    for lv in levels:
        if not 0.0 < lv < 1.0:
            raise ValueError(f"contour levels must lie in (0, 1), got {lv}")
    return [
        _level_polylines(values, tau_axis, theta_axis, lv)
        for lv in levels
    ]


def _level_polylines(values, tau_axis, theta_axis, level) -> List[np.ndarray]:
    n_rows, n_cols = values.shape
    if n_rows < 2 or n_cols < 2:
        return []
    finite = np.isfinite(values)
    with np.errstate(invalid="ignore"):
        inside = values > level

    def crossing(kind: str, i: int, j: int) -> Tuple[float, float]:
        if kind == "h":
            va, vb = values[i, j], values[i, j + 1]
            t = (level - va) / (vb - va)
            return (tau_axis[j] + t * (tau_axis[j + 1] - tau_axis[j]), theta_axis[i])
        va, vb = values[i, j], values[i + 1, j]
        t = (level - va) / (vb - va)
        return (tau_axis[j], theta_axis[i] + t * (theta_axis[i + 1] - theta_axis[i]))

    segments: List[Tuple[EdgeKey, EdgeKey]] = []
    for i in range(n_rows - 1):
        for j in range(n_cols - 1):
            if not (finite[i, j] and finite[i, j + 1] and finite[i + 1, j] and finite[i + 1, j + 1]):
                continue
            b00 = inside[i, j]
            b01 = inside[i, j + 1]
            b11 = inside[i + 1, j + 1]
            b10 = inside[i + 1, j]
            total = int(b00) + int(b01) + int(b11) + int(b10)
            if total in (0, 4):
                continue
            bottom: EdgeKey = ("h", i, j)
            top: EdgeKey = ("h", i + 1, j)
            left: EdgeKey = ("v", i, j)
            right: EdgeKey = ("v", i, j + 1)
            crossed = []
            if b00 != b01:
                crossed.append(bottom)
            if b01 != b11:
                crossed.append(right)
            if b10 != b11:
                crossed.append(top)
            if b00 != b10:
                crossed.append(left)
            if len(crossed) == 2:
                segments.append((crossed[0], crossed[1]))
            else:
                # Saddle cell: resolve with the cell-centre average. When the
                # centre is on the inside, the two inside corners connect.
                centre_inside = (
                    values[i, j] + values[i, j + 1] + values[i + 1, j] + values[i + 1, j + 1]
                ) / 4.0 > level
                if b00 == centre_inside:
                    segments.append((bottom, right))
                    segments.append((top, left))
                else:
                    segments.append((bottom, left))
                    segments.append((top, right))

    return _chain_segments(segments, crossing)


def _chain_segments(segments, crossing) -> List[np.ndarray]:
    if not segments:
        return []
    adjacency: Dict[EdgeKey, List[EdgeKey]] = {}
    for a, b in segments:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)

    used = set()
    paths: List[List[EdgeKey]] = []

    def walk(start: EdgeKey) -> List[EdgeKey]:
        path = [start]
        current = start
        while True:
            advanced = False
            for nxt in adjacency[current]:
                key = frozenset((current, nxt))
                if key not in used:
                    used.add(key)
                    path.append(nxt)
                    current = nxt
                    advanced = True
                    break
            if not advanced:
                return path

    # Open chains first (endpoints have a single neighbour), then cycles.
    for node, neighbours in adjacency.items():
        if len(neighbours) == 1:
            if all(frozenset((node, n)) in used for n in neighbours):
                continue
            paths.append(walk(node))
    for a, b in segments:
        if frozenset((a, b)) not in used:
            used.add(frozenset((a, b)))
            path = [a, b]
            current = b
            while True:
                advanced = False
                for nxt in adjacency[current]:
                    key = frozenset((current, nxt))
                    if key not in used:
                        used.add(key)
                        path.append(nxt)
                        current = nxt
                        advanced = True
                        break
                if not advanced:
                    break
            paths.append(path)

    polylines = []
    for path in paths:
        pts = np.array([crossing(*edge) for edge in path], dtype=float)
        if len(path) > 2 and path[0] in adjacency.get(path[-1], []):
            closing = frozenset((path[-1], path[0]))
            # Cycles found by the second pass already consumed the closing
            # segment while walking; just seal the loop geometrically.
            if np.any(pts[0] != pts[-1]):
                pts = np.vstack([pts, pts[:1]])
        polylines.append(pts)
    return polylines


def is_closed(polyline: np.ndarray) -> bool:
    return len(polyline) > 2 and bool(np.all(polyline[0] == polyline[-1]))


def polyline_contains(polyline: np.ndarray, point: Tuple[float, float]) -> bool:
    """Even-odd test whether a closed polyline encloses a point."""
    x, y = point
    pts = np.asarray(polyline, dtype=float)
    if not is_closed(pts):
        raise ValueError("containment is only defined for closed polylines")
    x0, y0 = pts[:-1, 0], pts[:-1, 1]
    x1, y1 = pts[1:, 0], pts[1:, 1]
    straddles = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) / (y1 - y0) * (x1 - x0)
    hits = straddles & (x_cross > x)
    return bool(np.count_nonzero(hits) % 2 == 1)


def polygon_area(polyline: np.ndarray) -> float:
    """Unsigned shoelace area of a closed polyline."""
    pts = np.asarray(polyline, dtype=float)
    if not is_closed(pts):
        raise ValueError("area is only defined for closed polylines")
    x, y = pts[:-1, 0], pts[:-1, 1]
    xn, yn = pts[1:, 0], pts[1:, 1]
    return float(abs(np.sum(x * yn - xn * y)) / 2.0)


def crossings_at_tau(polylines: Iterable[np.ndarray], tau: float) -> np.ndarray:
    """Sorted theta values where polylines cross the vertical line tau."""
    hits: List[float] = []
    for poly in polylines:
        pts = np.asarray(poly, dtype=float)
        x0, x1 = pts[:-1, 0], pts[1:, 0]
        straddles = (x0 > tau) != (x1 > tau)
        for k in np.nonzero(straddles)[0]:
            t = (tau - x0[k]) / (x1[k] - x0[k])
            hits.append(float(pts[k, 1] + t * (pts[k + 1, 1] - pts[k, 1])))
    return np.array(sorted(hits))


def enclosed_interval_at_tau(
    polylines: Iterable[np.ndarray], tau: float, theta: float
) -> Tuple[float, float]:
    """The (theta_lo, theta_hi) enclosed interval containing ``theta``.

    Crossings along the vertical line are paired in sorted order (even-odd
    rule); raises if the requested theta is not inside any interval.
    """
    hits = crossings_at_tau(polylines, tau)
    for lo, hi in zip(hits[0::2], hits[1::2]):
        if lo <= theta <= hi:
            return float(lo), float(hi)
    raise ValueError(f"theta={theta} is not enclosed at tau={tau}")
