"""Polyline helpers shared by the sweeper, router and time parameterization."""

from __future__ import annotations

import math
from typing import Sequence

Point = tuple[float, float]

TURN_TOL = 1e-6  # radians


def dedupe(points: Sequence[Point]) -> list[Point]:
    out: list[Point] = []
    for p in points:
        p = (float(p[0]), float(p[1]))
        if not out or out[-1] != p:
            out.append(p)
    return out


def polyline_length(points: Sequence[Point]) -> float:
    return math.fsum(math.hypot(q[0] - p[0], q[1] - p[1]) for p, q in zip(points[:-1], points[1:]))


def heading_change(a: Point, b: Point, c: Point) -> float:
    """Absolute heading change at ``b`` in [0, pi]."""
    h1 = math.atan2(b[1] - a[1], b[0] - a[0])
    h2 = math.atan2(c[1] - b[1], c[0] - b[0])
    d = abs(h2 - h1) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def turn_vertices(points: Sequence[Point], tol: float = TURN_TOL) -> list[int]:
    """Indices (into the deduplicated polyline) of interior vertices that turn."""
    pts = dedupe(points)
    return [k for k in range(1, len(pts) - 1) if heading_change(pts[k - 1], pts[k], pts[k + 1]) > tol]


def count_turns(points: Sequence[Point], tol: float = TURN_TOL) -> int:
    return len(turn_vertices(points, tol))


def simplify(points: Sequence[Point], tol: float = TURN_TOL) -> list[Point]:
    """Drop repeated points and interior vertices with no heading change."""
    pts = dedupe(points)
    if len(pts) < 3:
        return pts
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        if heading_change(out[-1], pts[k], pts[k + 1]) > tol:
            out.append(pts[k])
    out.append(pts[-1])
    return out
