"""Per-frame spacing metrics: pairwise distances, convex hull, hull area, centroid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import EmptyVector, TooFewPlayers
from .ingest import Frame

ORIENT_EPS = 1e-12


@dataclass(frozen=True)
class DistanceVector:
    t_ms: int
    pairs: tuple[tuple[str, str, float], ...]

    @property
    def distances(self) -> list[float]:
        return [d for _, _, d in self.pairs]

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class HullMetrics:
    t_ms: int
    hull_vertices: tuple[tuple[float, float], ...]
    area_m2: float
    centroid: tuple[float, float]


def pairwise_distances(frame: Frame) -> DistanceVector:
    """Euclidean distance for each unordered pair, pairs in canonical tag order."""
    tags = frame.tags
    if len(tags) < 2:
        raise TooFewPlayers(f"frame at t={frame.t_ms} has {len(tags)} player(s)")
    pos = frame.positions
    pairs = tuple(
        (a, b, math.hypot(pos[a][0] - pos[b][0], pos[a][1] - pos[b][1])) for a, b in combinations(tags, 2)
    )
    return DistanceVector(frame.t_ms, pairs)


def mean_distance(dv: DistanceVector) -> float:
    if len(dv.pairs) == 0:
        raise EmptyVector("distance vector is empty")
    return math.fsum(dv.distances) / len(dv.pairs)


def cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def is_left_turn(o, a, b) -> bool:
    """Strict counter-clockwise turn, with a relative tolerance on the cross product."""
    c = cross(o, a, b)
    scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(b[0] - o[0], b[1] - o[1])
    return c > ORIENT_EPS * scale


def _keeps_middle(o, a, b) -> bool:
    """Chain step: keep ``a`` between ``o`` and ``b``?

    Near-collinear triples within the tolerance drop ``a`` only when it lies
    between its neighbours; otherwise the raw sign of the cross product decides.
    """
    if is_left_turn(o, a, b):
        return True
    c = cross(o, a, b)
    scale = math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(b[0] - o[0], b[1] - o[1])
    if c < -ORIENT_EPS * scale:
        return False
    between = (a[0] - o[0]) * (b[0] - a[0]) + (a[1] - o[1]) * (b[1] - a[1]) >= 0
    return not between and c > 0


def convex_hull(points: Iterable[Sequence[float]]) -> list[tuple[float, float]]:
    """Andrew's monotone chain.

    Returns the hull counter-clockwise starting from the lowest-x (then
    lowest-y) point. Collinear boundary points are dropped; fewer than three
    non-collinear points yield the degenerate point or segment.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return pts

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and not _keeps_middle(lower[-2], lower[-1], p):
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and not _keeps_middle(upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    """Shoelace area (absolute value); fewer than three vertices gives 0."""
    n = len(vertices)
    if n < 3:
        return 0.0
    terms = []
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        terms.append(x0 * y1 - x1 * y0)
    return abs(math.fsum(terms)) / 2.0


def point_in_convex_polygon(point, hull: Sequence[Sequence[float]], tol: float = 1e-9) -> bool:
    """Inside-or-on test for a counter-clockwise convex polygon (degenerate hulls allowed)."""
    px, py = point
    if len(hull) == 0:
        return False
    if len(hull) == 1:
        return math.hypot(px - hull[0][0], py - hull[0][1]) <= tol
    if len(hull) == 2:
        (ax, ay), (bx, by) = hull
        length = math.hypot(bx - ax, by - ay)
        if abs(cross(hull[0], hull[1], point)) > tol * max(length, 1.0):
            return False
        dot = (px - ax) * (bx - ax) + (py - ay) * (by - ay)
        return -tol <= dot <= length * length + tol
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        edge = math.hypot(b[0] - a[0], b[1] - a[1])
        if cross(a, b, point) < -tol * max(edge, 1.0):
            return False
    return True


def hull_metrics(frame: Frame) -> HullMetrics:
    pts = [frame.positions[t] for t in frame.tags]
    hull = convex_hull(pts)
    cx = math.fsum(p[0] for p in pts) / len(pts)
    cy = math.fsum(p[1] for p in pts) / len(pts)
    return HullMetrics(frame.t_ms, tuple(hull), polygon_area(hull), (cx, cy))


def hull_series(frames: Iterable[Frame]) -> list[HullMetrics]:
    return [hull_metrics(f) for f in frames]
