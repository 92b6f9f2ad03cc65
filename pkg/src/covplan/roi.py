"""Polygonal ROIs, the footprint grid, rasterization and coverage checks.

Coordinates are meters. Cells are addressed ``(col, row)`` with cell
``(c, r)`` occupying ``[ox + c*w, ox + (c+1)*w] x [oy + r*w, oy + (r+1)*w]``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon

from .errors import EmptyRegionError, InvalidROIError, InvalidSpecError

Point = tuple[float, float]
Cell = tuple[int, int]

# relative slack used for "positive area" and "entirely inside" decisions
AREA_EPS = 1e-9


def _clean_ring(ring: Iterable[Sequence[float]]) -> list[Point]:
    pts = [(float(p[0]), float(p[1])) for p in ring]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    out: list[Point] = []
    for p in pts:
        if not out or out[-1] != p:
            out.append(p)
    return out


def _signed_area(ring: Sequence[Point]) -> float:
    s = 0.0
    for (x0, y0), (x1, y1) in zip(ring, list(ring[1:]) + [ring[0]]):
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class PolygonROI:
    """A region of interest: one outer ring plus hole rings.

    Rings are normalised on construction: outer counterclockwise, holes
    clockwise, no repeated closing vertex.
    """

    outer: tuple[Point, ...]
    holes: tuple[tuple[Point, ...], ...] = ()
    id: str = "roi"

    def __post_init__(self):
        outer = _clean_ring(self.outer)
        if len(outer) < 3:
            raise InvalidROIError(f"{self.id}: outer ring needs at least 3 distinct vertices")
        if not LinearRing(outer).is_simple:
            raise InvalidROIError(f"{self.id}: outer ring self-intersects")
        if _signed_area(outer) < 0:
            outer.reverse()
        if abs(_signed_area(outer)) == 0.0:
            raise InvalidROIError(f"{self.id}: outer ring has zero area")
        shell = Polygon(outer)
        holes = []
        hole_polys = []
        for k, h in enumerate(self.holes):
            ring = _clean_ring(h)
            if len(ring) < 3 or not LinearRing(ring).is_simple or _signed_area(ring) == 0.0:
                raise InvalidROIError(f"{self.id}: hole {k} is not a simple ring")
            if _signed_area(ring) > 0:
                ring.reverse()
            hp = Polygon(ring)
            if not shell.contains_properly(hp):
                raise InvalidROIError(f"{self.id}: hole {k} is not strictly inside the outer ring")
            for j, other in enumerate(hole_polys):
                if hp.intersects(other):
                    raise InvalidROIError(f"{self.id}: holes {j} and {k} overlap")
            hole_polys.append(hp)
            holes.append(tuple(ring))
        object.__setattr__(self, "outer", tuple(outer))
        object.__setattr__(self, "holes", tuple(holes))

    @cached_property
    def shell(self) -> Polygon:
        return Polygon(self.outer)

    @cached_property
    def hole_polygons(self) -> list[Polygon]:
        return [Polygon(h) for h in self.holes]

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.outer, list(self.holes))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.shell.bounds

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "outer": [list(p) for p in self.outer],
            "holes": [[list(p) for p in h] for h in self.holes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolygonROI":
        try:
            return cls(
                outer=tuple(tuple(p) for p in d["outer"]),
                holes=tuple(tuple(tuple(p) for p in h) for h in d.get("holes", [])),
                id=str(d.get("id", "roi")),
            )
        except KeyError as exc:
            raise InvalidROIError(f"ROI object missing field {exc}") from None


@dataclass(frozen=True)
class FootprintSpec:
    """Either ``width`` directly, or ``altitude`` plus ``half_angle`` (radians)."""

    altitude: Optional[float] = None
    half_angle: Optional[float] = None
    width: Optional[float] = None

    def __post_init__(self):
        derived = self.altitude is not None or self.half_angle is not None
        if derived and self.width is not None:
            raise InvalidSpecError("give either width or altitude+half_angle, not both")
        if not derived and self.width is None:
            raise InvalidSpecError("footprint needs width or altitude+half_angle")
        if derived and (self.altitude is None or self.half_angle is None):
            raise InvalidSpecError("derived footprint needs both altitude and half_angle")


def footprint_width(spec: FootprintSpec) -> float:
    """Cross-track footprint width of a nadir pinhole camera, ``2 h tan(phi/2)``."""
    if spec.width is not None:
        if not spec.width > 0 or not math.isfinite(spec.width):
            raise InvalidSpecError(f"footprint width must be positive, got {spec.width}")
        return float(spec.width)
    h, half = spec.altitude, spec.half_angle
    if not h > 0 or not math.isfinite(h):
        raise InvalidSpecError(f"altitude must be positive, got {h}")
    if not 0.0 < half < math.pi / 2:
        raise InvalidSpecError(f"half angle must lie in (0, pi/2), got {half}")
    return 2.0 * h * math.tan(half)


@dataclass(frozen=True)
class GridSpec:
    origin: Point
    cell_size: float
    columns: int
    rows: int

    def __post_init__(self):
        if not self.cell_size > 0:
            raise InvalidSpecError(f"cell_size must be positive, got {self.cell_size}")
        if self.columns < 1 or self.rows < 1:
            raise InvalidSpecError("grid needs at least one row and one column")

    @classmethod
    def covering(cls, roi: PolygonROI, cell_size: float) -> "GridSpec":
        """Grid whose origin is the ROI bbox minimum floored to a multiple of ``cell_size``."""
        if not cell_size > 0:
            raise InvalidSpecError(f"cell_size must be positive, got {cell_size}")
        minx, miny, maxx, maxy = roi.bounds
        ox = math.floor(minx / cell_size) * cell_size
        oy = math.floor(miny / cell_size) * cell_size
        n = max(1, math.ceil((maxx - ox) / cell_size - 1e-12))
        m = max(1, math.ceil((maxy - oy) / cell_size - 1e-12))
        return cls((ox, oy), cell_size, n, m)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        w = self.cell_size
        return ox, oy, ox + self.columns * w, oy + self.rows * w

    def x(self, col: float) -> float:
        return self.origin[0] + col * self.cell_size

    def y(self, row: float) -> float:
        return self.origin[1] + row * self.cell_size

    def cell_box(self, cell: Cell) -> tuple[float, float, float, float]:
        c, r = cell
        return self.x(c), self.y(r), self.x(c + 1), self.y(r + 1)

    def to_dict(self) -> dict:
        return {"origin": list(self.origin), "cell_size": self.cell_size,
                "columns": self.columns, "rows": self.rows}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["origin"]), float(d["cell_size"]), int(d["columns"]), int(d["rows"]))


def unit_grid(columns: int, rows: int, cell_size: float = 1.0) -> GridSpec:
    return GridSpec((0.0, 0.0), cell_size, columns, rows)


@dataclass(frozen=True, eq=False)
class CellRegion:
    """An immutable set of grid cells sharing one :class:`GridSpec`."""

    grid: GridSpec
    cells: frozenset
    component_id: str = "0"

    def __post_init__(self):
        cells = frozenset((int(c), int(r)) for c, r in self.cells)
        for c, r in cells:
            if not (0 <= c < self.grid.columns and 0 <= r < self.grid.rows):
                raise InvalidSpecError(f"cell {(c, r)} outside grid bounds")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, CellRegion):
            return NotImplemented
        return self.grid == other.grid and self.cells == other.cells

    def __hash__(self):
        return hash((self.grid, self.cells))

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        return cell in self.cells

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], grid: Optional[GridSpec] = None,
                   component_id: str = "0") -> "CellRegion":
        cells = frozenset(cells)
        if grid is None:
            cols = max((c for c, _ in cells), default=0) + 1
            rows = max((r for _, r in cells), default=0) + 1
            grid = unit_grid(cols, rows)
        return cls(grid, cells, component_id)

    def with_cells(self, cells: Iterable[Cell], component_id: Optional[str] = None) -> "CellRegion":
        return CellRegion(self.grid, frozenset(cells),
                          self.component_id if component_id is None else component_id)

    @cached_property
    def sorted_cells(self) -> list[Cell]:
        """Cells ordered by (row, col)."""
        return sorted(self.cells, key=lambda rc: (rc[1], rc[0]))

    @cached_property
    def array(self) -> np.ndarray:
        """``(n, 2)`` int array of ``(col, row)`` sorted by row then col."""
        if not self.cells:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(self.sorted_cells, dtype=np.int64)

    @cached_property
    def cell_bounds(self) -> tuple[int, int, int, int]:
        """(min_col, min_row, max_col, max_row), inclusive."""
        a = self.array
        return int(a[:, 0].min()), int(a[:, 1].min()), int(a[:, 0].max()), int(a[:, 1].max())

    @property
    def anchor(self) -> tuple[int, int]:
        """(min row, min col) ordering key."""
        a = self.array
        r = int(a[:, 1].min())
        return r, int(a[a[:, 1] == r, 0].min())

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        c0, r0, c1, r1 = self.cell_bounds
        g = self.grid
        return g.x(c0), g.y(r0), g.x(c1 + 1), g.y(r1 + 1)

    @property
    def area(self) -> float:
        return len(self.cells) * self.grid.cell_size ** 2

    def mask(self) -> tuple[np.ndarray, int, int]:
        """Dense boolean mask over the cell bounding box, indexed ``[row, col]``."""
        c0, r0, c1, r1 = self.cell_bounds
        m = np.zeros((r1 - r0 + 1, c1 - c0 + 1), dtype=bool)
        a = self.array
        m[a[:, 1] - r0, a[:, 0] - c0] = True
        return m, c0, r0

    def boxes(self) -> np.ndarray:
        a = self.array
        g = self.grid
        x0 = g.origin[0] + a[:, 0] * g.cell_size
        y0 = g.origin[1] + a[:, 1] * g.cell_size
        return shapely.box(x0, y0, x0 + g.cell_size, y0 + g.cell_size)

    def geometry(self):
        """Union of the cell squares as a shapely geometry."""
        return shapely.union_all(self.boxes())

    def to_dict(self) -> dict:
        return {"component_id": self.component_id, "grid": self.grid.to_dict(),
                "cells": [list(c) for c in self.sorted_cells]}

    @classmethod
    def from_dict(cls, d: dict) -> "CellRegion":
        return cls(GridSpec.from_dict(d["grid"]), frozenset(tuple(c) for c in d["cells"]),
                   str(d.get("component_id", "0")))


@dataclass(frozen=True)
class CoverageParams:
    alpha: float
    footprint: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidSpecError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.footprint > 0:
            raise InvalidSpecError(f"footprint must be positive, got {self.footprint}")


def _grid_boxes(grid: GridSpec):
    cols, rows = np.meshgrid(np.arange(grid.columns), np.arange(grid.rows))
    cols = cols.ravel()
    rows = rows.ravel()
    x0 = grid.origin[0] + cols * grid.cell_size
    y0 = grid.origin[1] + rows * grid.cell_size
    return cols, rows, shapely.box(x0, y0, x0 + grid.cell_size, y0 + grid.cell_size)


def rasterize(roi: PolygonROI, grid: GridSpec) -> CellRegion:
    """Retain cells that overlap the outer ring with positive area and are not
    entirely inside a hole."""
    gx0, gy0, gx1, gy1 = grid.bounds
    minx, miny, maxx, maxy = roi.bounds
    slack = 1e-9 * grid.cell_size
    if minx < gx0 - slack or miny < gy0 - slack or maxx > gx1 + slack or maxy > gy1 + slack:
        raise InvalidSpecError(f"grid {grid.bounds} does not contain ROI {roi.id} {roi.bounds}")
    cols, rows, boxes = _grid_boxes(grid)
    shell = roi.shell
    shapely.prepare(shell)
    hits = shapely.intersects(shell, boxes)
    keep = np.zeros(len(boxes), dtype=bool)
    idx = np.flatnonzero(hits)
    if len(idx):
        areas = shapely.area(shapely.intersection(boxes[idx], shell))
        keep[idx] = areas > AREA_EPS * grid.cell_size ** 2
    for hole in roi.hole_polygons:
        idx = np.flatnonzero(keep)
        if not len(idx):
            break
        # "entirely inside" tolerates float noise on shared edges
        inside = shapely.area(shapely.difference(boxes[idx], hole)) <= AREA_EPS * grid.cell_size ** 2
        keep[idx[inside]] = False
    cells = frozenset(zip(cols[keep].tolist(), rows[keep].tolist()))
    if not cells:
        raise EmptyRegionError(f"ROI {roi.id} retained no cells at cell size {grid.cell_size}")
    return CellRegion(grid, cells, roi.id)


def partial_hole_cells(roi: PolygonROI, region: CellRegion) -> list[Cell]:
    """Retained cells that overlap some hole with positive area (kept by the
    retention rule; reported for diagnostics)."""
    if not roi.holes:
        return []
    boxes = region.boxes()
    flagged = np.zeros(len(boxes), dtype=bool)
    for hole in roi.hole_polygons:
        flagged |= shapely.area(shapely.intersection(boxes, hole)) > AREA_EPS * region.grid.cell_size ** 2
    return [tuple(c) for c in region.array[flagged].tolist()]


_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def connected_components(region: CellRegion) -> list[CellRegion]:
    """Maximal 4-connected components ordered by (min row, min col)."""
    remaining = set(region.cells)
    comps = []
    for start in region.sorted_cells:
        if start not in remaining:
            continue
        remaining.discard(start)
        comp = [start]
        queue = deque([start])
        while queue:
            c, r = queue.popleft()
            for dc, dr in _NEIGHBORS:
                nb = (c + dc, r + dr)
                if nb in remaining:
                    remaining.discard(nb)
                    comp.append(nb)
                    queue.append(nb)
        comps.append(comp)
    # sorted_cells walks by (row, col), so components already come out in anchor order
    base = region.component_id
    if len(comps) == 1:
        return [region.with_cells(comps[0])]
    return [region.with_cells(c, f"{base}.{k}") for k, c in enumerate(comps)]


def is_connected(region: CellRegion) -> bool:
    return len(region.cells) > 0 and len(connected_components(region)) == 1


def _segments(trajectory: Sequence[Point]) -> list[tuple[Point, Point]]:
    pts = [(float(x), float(y)) for x, y in trajectory]
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    if len(dedup) == 1:
        return [(dedup[0], dedup[0])]
    return list(zip(dedup[:-1], dedup[1:]))


def swath_geometry(trajectory: Sequence[Point], footprint: float):
    """Union of square-capped ``footprint``-wide swaths, one per segment.

    A single point yields one ``footprint x footprint`` square.
    """
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    half = footprint / 2.0
    parts = []
    for p, q in _segments(trajectory):
        if p == q:
            parts.append(shapely.box(p[0] - half, p[1] - half, p[0] + half, p[1] + half))
        else:
            parts.append(shapely.LineString([p, q]).buffer(half, cap_style="square", join_style="mitre"))
    return shapely.union_all(parts)


def cell_coverage_fractions(region: CellRegion, trajectory: Sequence[Point], footprint: float) -> np.ndarray:
    """Covered area fraction of every cell, in ``region.array`` order (exact clipping)."""
    swath = swath_geometry(trajectory, footprint)
    shapely.prepare(swath)
    boxes = region.boxes()
    frac = np.zeros(len(boxes))
    full = shapely.covers(swath, boxes)
    frac[full] = 1.0
    rest = np.flatnonzero(~full & shapely.intersects(swath, boxes))
    if len(rest):
        frac[rest] = shapely.area(shapely.intersection(boxes[rest], swath)) / region.grid.cell_size ** 2
    return np.clip(frac, 0.0, 1.0)


def coverage_ratio(region: CellRegion, trajectory: Sequence[Point], params: CoverageParams) -> float:
    """Fraction of retained cells whose covered area reaches ``params.alpha``."""
    if not region.cells:
        return 1.0
    frac = cell_coverage_fractions(region, trajectory, params.footprint)
    return float(np.count_nonzero(frac >= params.alpha - 1e-12) / len(frac))


def coverage_ratio_sampled(region: CellRegion, trajectory: Sequence[Point], params: CoverageParams,
                           samples: int = 50) -> float:
    """Sub-sampling coverage oracle independent of polygon clipping.

    Each cell is probed at ``samples x samples`` interior points; a point is
    covered when it lies inside the square-capped swath rectangle of some
    segment, tested analytically in the segment's own frame.
    """
    if not region.cells:
        return 1.0
    g = region.grid
    w = g.cell_size
    mask, c0, r0 = region.mask()
    nr, nc = mask.shape
    k = samples
    offs = (np.arange(k) + 0.5) / k
    covered = np.zeros((nr, nc, k, k), dtype=bool)
    half = params.footprint / 2.0
    tol = 1e-9 * max(w, params.footprint)
    for p, q in _segments(trajectory):
        (px, py), (qx, qy) = p, q
        length = math.hypot(qx - px, qy - py)
        ux, uy = ((qx - px) / length, (qy - py) / length) if length > 0 else (1.0, 0.0)
        mx, my = (px + qx) / 2, (py + qy) / 2
        reach = length / 2 + half
        ext = reach + half
        lo_c = max(0, int(math.floor((mx - ext - g.origin[0]) / w)) - c0)
        hi_c = min(nc, int(math.ceil((mx + ext - g.origin[0]) / w)) - c0 + 1)
        lo_r = max(0, int(math.floor((my - ext - g.origin[1]) / w)) - r0)
        hi_r = min(nr, int(math.ceil((my + ext - g.origin[1]) / w)) - r0 + 1)
        if lo_c >= hi_c or lo_r >= hi_r:
            continue
        cols = np.arange(lo_c, hi_c) + c0
        rows = np.arange(lo_r, hi_r) + r0
        xs = g.origin[0] + (cols[:, None] + offs[None, :]) * w  # (nc', k)
        ys = g.origin[1] + (rows[:, None] + offs[None, :]) * w  # (nr', k)
        dx = xs[None, :, None, :] - mx
        dy = ys[:, None, :, None] - my
        along = dx * ux + dy * uy
        across = -dx * uy + dy * ux
        inside = (np.abs(along) <= reach + tol) & (np.abs(across) <= half + tol)
        covered[lo_r:hi_r, lo_c:hi_c] |= inside
    frac = covered.mean(axis=(2, 3))[mask]
    return float(np.count_nonzero(frac >= params.alpha - 1e-12) / len(frac))
