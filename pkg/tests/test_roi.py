import math

import mpmath
import numpy as np
import pytest
import shapely
from hypothesis import given, settings, strategies as st
from shapely.geometry import MultiPoint, Polygon

from covplan.errors import EmptyRegionError, InvalidROIError, InvalidSpecError
from covplan.roi import (CellRegion, CoverageParams, FootprintSpec, GridSpec, PolygonROI, connected_components,
                         coverage_ratio, coverage_ratio_sampled, footprint_width, is_connected, partial_hole_cells,
                         rasterize)

from helpers import flood_components, rect, region


def square(x0, y0, s):
    return [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)]


def sampled_cells(roi, grid, n=100):
    """Point-in-polygon oracle: (shell fraction, hole fraction) per cell."""
    out = {}
    t = (np.arange(n) + 0.5) / n
    for r in range(grid.rows):
        for c in range(grid.columns):
            x0, y0, x1, y1 = grid.cell_box((c, r))
            xs, ys = np.meshgrid(x0 + t * (x1 - x0), y0 + t * (y1 - y0))
            xs, ys = xs.ravel(), ys.ravel()
            in_shell = shapely.contains_xy(roi.shell, xs, ys)
            in_hole = np.zeros_like(in_shell)
            for h in roi.hole_polygons:
                in_hole |= shapely.contains_xy(h, xs, ys)
            out[(c, r)] = (in_shell.mean(), (in_shell & in_hole).mean())
    return out


# ---------------------------------------------------------------- footprint

def test_footprint_from_geometry():
    assert footprint_width(FootprintSpec(altitude=10, half_angle=math.pi / 4)) == pytest.approx(20.0, rel=1e-15)


def test_footprint_direct_width():
    assert footprint_width(FootprintSpec(width=3.5)) == 3.5


def test_footprint_matches_high_precision():
    mpmath.mp.dps = 50
    want = 2 * mpmath.mpf(100) * mpmath.tan(mpmath.mpf("0.3"))
    got = footprint_width(FootprintSpec(altitude=100, half_angle=0.3))
    assert abs(got - float(want)) <= 1e-13 * float(want)


@pytest.mark.parametrize("kw", [dict(altitude=0, half_angle=0.3), dict(altitude=-1, half_angle=0.3),
                                dict(altitude=10, half_angle=0.0), dict(altitude=10, half_angle=math.pi / 2),
                                dict(width=0.0), dict(width=-2.0)])
def test_footprint_rejects_bad_specs(kw):
    with pytest.raises(InvalidSpecError):
        footprint_width(FootprintSpec(**kw))


# ---------------------------------------------------------------- ROI validation

def test_roi_normalises_orientation():
    roi = PolygonROI(list(reversed(square(0, 0, 4))), [square(1, 1, 1)])
    assert Polygon(roi.outer).exterior.is_ccw
    assert not Polygon(roi.holes[0]).exterior.is_ccw


@pytest.mark.parametrize("outer,holes", [
    ([(0, 0), (2, 2), (2, 0), (0, 2)], []),  # bow tie
    (square(0, 0, 4), [square(3, 3, 2)]),  # hole crosses the shell
    (square(0, 0, 4), [square(1, 1, 1), square(1.5, 1.5, 1)]),  # overlapping holes
    ([(0, 0), (1, 0)], []),
])
def test_roi_rejects_invalid(outer, holes):
    with pytest.raises(InvalidROIError):
        PolygonROI(outer, holes)


def test_roi_round_trip():
    roi = PolygonROI(square(0, 0, 4), [square(1, 1, 1)], id="a")
    assert PolygonROI.from_dict(roi.to_dict()) == roi


# ---------------------------------------------------------------- rasterize

def test_rasterize_aligned_square():
    w = 5.0
    roi = PolygonROI(square(0, 0, 2 * w))
    assert rasterize(roi, GridSpec.covering(roi, w)).cells == {(0, 0), (1, 0), (0, 1), (1, 1)}


@pytest.mark.parametrize("side,hole,expected", [(2, 0.5, 4), (3, 1.0, 8)])
def test_rasterize_with_hole_matches_sampling(side, hole, expected):
    w = 2.0
    c = side * w / 2
    roi = PolygonROI(square(0, 0, side * w), [square(c - hole * w / 2, c - hole * w / 2, hole * w)])
    grid = GridSpec.covering(roi, w)
    got = rasterize(roi, grid)
    oracle = {cell for cell, (shell, in_hole) in sampled_cells(roi, grid).items() if shell > 0 and in_hole < 1}
    assert got.cells == oracle
    assert len(got) == expected


def test_partial_hole_cells_flagged():
    roi = PolygonROI(square(0, 0, 2), [square(0.75, 0.75, 0.5)])
    reg = rasterize(roi, GridSpec.covering(roi, 1.0))
    assert len(reg) == 4
    assert set(partial_hole_cells(roi, reg)) == set(reg.cells)


def test_rasterize_empty_region():
    sliver = PolygonROI([(0.1, 0.1), (0.1 + 1e-6, 0.1), (0.1, 0.1 + 1e-6)])  # area far below one cell
    with pytest.raises(EmptyRegionError):
        rasterize(sliver, GridSpec.covering(sliver, 1.0))


def test_grid_origin_is_floored():
    roi = PolygonROI(square(13, -7, 10))
    g = GridSpec.covering(roi, 5.0)
    assert g.origin == (10.0, -10.0)
    x0, y0, x1, y1 = g.bounds
    assert x0 <= 13 and y0 <= -7 and x1 >= 23 and y1 >= 3


points = st.lists(st.tuples(st.floats(0, 20), st.floats(0, 20)), min_size=3, max_size=8)


@settings(max_examples=60, deadline=None)
@given(points, points)
def test_rasterize_monotone_in_roi(a, extra):
    hull_a = MultiPoint(a).convex_hull
    hull_b = MultiPoint(a + extra).convex_hull
    if hull_a.geom_type != "Polygon" or hull_a.area < 1.0:
        return
    ra = PolygonROI(list(hull_a.exterior.coords))
    rb = PolygonROI(list(hull_b.exterior.coords))
    grid = GridSpec((0.0, 0.0), 2.0, 10, 10)
    assert rasterize(ra, grid).cells <= rasterize(rb, grid).cells


@settings(max_examples=25, deadline=None)
@given(points)
def test_rasterized_cells_agree_with_sampling(pts):
    hull = MultiPoint(pts).convex_hull
    if hull.geom_type != "Polygon" or hull.area < 1.0:
        return
    roi = PolygonROI(list(hull.exterior.coords))
    grid = GridSpec((0.0, 0.0), 4.0, 5, 5)
    got = rasterize(roi, grid).cells
    for cell, (frac, _) in sampled_cells(roi, grid, n=40).items():
        if frac > 0.01:
            assert cell in got
        if cell in got:
            exact = roi.shell.intersection(shapely.box(*grid.cell_box(cell))).area / 16.0
            assert exact > 0 and abs(exact - frac) < 0.01 + 0.05


# ---------------------------------------------------------------- components

def test_diagonal_cells_are_separate():
    comps = connected_components(region({(0, 0), (1, 1)}))
    assert len(comps) == 2
    assert not is_connected(region({(0, 0), (1, 1)}))


def test_rectangle_is_one_component():
    assert len(connected_components(rect(4, 3))) == 1


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=30))
def test_components_match_flood_fill(cells):
    comps = connected_components(region(cells, 7, 7))
    assert sorted(sorted(c.cells) for c in comps) == sorted(sorted(c) for c in flood_components(cells))
    union = set()
    for c in comps:
        assert not (union & c.cells)
        union |= c.cells
    assert union == cells


def test_ten_scattered_cells():
    rng = np.random.default_rng(3)
    cells = {tuple(int(v) for v in rng.integers(0, 5, 2)) for _ in range(10)}
    comps = connected_components(region(cells, 5, 5))
    assert {c.cells for c in comps} == set(flood_components(cells))


def test_region_round_trip():
    reg = region({(0, 0), (2, 1), (1, 1)}, 3, 2, 2.5)
    assert CellRegion.from_dict(reg.to_dict()) == reg


# ---------------------------------------------------------------- coverage

def params(w=1.0, alpha=0.99):
    return CoverageParams(alpha, w)


@pytest.mark.parametrize("k", [1, 2, 5])
def test_single_track_covers_row(k):
    w = 3.0
    reg = region({(c, 0) for c in range(k)}, k, 1, w)
    traj = [(0.0, w / 2), (k * w, w / 2)]
    assert coverage_ratio(reg, traj, params(w)) == 1.0
    assert coverage_ratio_sampled(reg, traj, params(w)) == 1.0


def test_point_covers_one_cell():
    reg = region({(c, 0) for c in range(4)}, 4, 1)
    assert coverage_ratio(reg, [(1.5, 0.5)], params()) == 0.25
    assert coverage_ratio_sampled(reg, [(1.5, 0.5)], params()) == 0.25


def test_serpentine_over_block():
    reg = rect(4, 4)
    traj = []
    for r in range(4):
        xs = (0.0, 4.0) if r % 2 == 0 else (4.0, 0.0)
        traj += [(xs[0], r + 0.5), (xs[1], r + 0.5)]
    assert coverage_ratio(reg, traj, params()) == 1.0
    assert coverage_ratio_sampled(reg, traj, params()) == 1.0


def test_missing_track_is_detected():
    reg = rect(4, 4)
    traj = [(0.0, 0.5), (4.0, 0.5), (4.0, 1.5), (0.0, 1.5), (0.0, 3.5), (4.0, 3.5)]
    # the vertical hop along x=0 covers half of each cell at (0, 2)
    assert coverage_ratio(reg, traj, params()) == 12 / 16
    assert coverage_ratio_sampled(reg, traj, params()) == 12 / 16
    assert coverage_ratio(reg, traj, params(alpha=0.5)) == 13 / 16


def test_alpha_must_be_in_unit_interval():
    with pytest.raises(InvalidSpecError):
        CoverageParams(0.0, 1.0)
    with pytest.raises(InvalidSpecError):
        CoverageParams(1.01, 1.0)
