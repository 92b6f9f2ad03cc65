import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covplan.decompose import HORIZONTAL, VERTICAL, decompose, single_partition
from covplan.geometry import count_turns, polyline_length
from covplan.roi import CoverageParams, coverage_ratio, is_connected
from covplan.sweep import CONNECTORS, SweepCandidate, candidates, track_layout

from helpers import from_art, rect, region, u_shape


def part(reg):
    return single_partition(reg).partitions[0]


def independent_turns(pts, tol=1e-6):
    n = 0
    for a, b, c in zip(pts, pts[1:], pts[2:]):
        h1 = math.atan2(b[1] - a[1], b[0] - a[0])
        h2 = math.atan2(c[1] - b[1], c[0] - b[0])
        d = abs((h2 - h1 + math.pi) % (2 * math.pi) - math.pi)
        n += d > tol
    return n


def test_rectangle_serpentine_bl():
    w = 2.0
    cs = candidates(part(rect(3, 4, w)))
    bl = next(c for c in cs if c.orientation == HORIZONTAL and c.start_corner == "BL")
    assert bl.entry == (0.0, w / 2)
    assert bl.length == pytest.approx(15 * w, rel=1e-12)
    assert bl.turns == 6


def test_two_row_tracks():
    tracks = track_layout(part(rect(5, 2)), HORIZONTAL)
    assert [t[0][1] for t in tracks] == [0.5, 1.5]
    assert all(abs(b[0] - a[0]) == 5.0 for a, b in tracks)


def test_u_shape_vertical_tracks():
    tracks = track_layout(part(u_shape()), VERTICAL)
    assert [abs(b[1] - a[1]) for a, b in tracks] == [3.0, 1.0, 3.0]
    with pytest.raises(ValueError):
        track_layout(part(u_shape()), HORIZONTAL)


def test_u_shape_has_four_candidates():
    cs = candidates(part(u_shape()))
    assert len(cs) == 4
    assert {c.orientation for c in cs} == {VERTICAL}


def test_l_shape_track_counts():
    reg = from_art("""
#..
#..
###
""")
    p = part(reg)
    assert p.feasible_axes == {HORIZONTAL, VERTICAL}
    assert len(track_layout(p, HORIZONTAL)) == 3
    assert len(track_layout(p, VERTICAL)) == 3


def test_single_cell_candidates():
    cs = candidates(part(region({(0, 0)})))
    assert len(cs) >= 1
    for c in cs:
        assert coverage_ratio(part(region({(0, 0)})).region, c.waypoints, CoverageParams(1.0, 1.0)) == 1.0


@pytest.mark.parametrize("k", range(1, 9))
def test_serpentine_turns(k):
    for c in candidates(part(rect(4, k))):
        if c.orientation == HORIZONTAL:
            assert c.turns == 2 * (k - 1)


def random_partitions(seed, n=30):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        cols, rows = (int(x) for x in rng.integers(1, 8, 2))
        mask = rng.random((rows, cols)) < 0.75
        reg = region({(c, r) for r in range(rows) for c in range(cols) if mask[r, c]} or {(0, 0)}, cols, rows)
        if is_connected(reg):
            out.extend(decompose(reg).partitions)
    return out


@pytest.mark.parametrize("connector", CONNECTORS)
def test_candidate_invariants(connector):
    for p in random_partitions(5):
        cs = candidates(p, connector)
        assert 1 <= len(cs) <= 8
        seen = {c.waypoints for c in cs}
        assert len(seen) == len(cs)
        for c in cs:
            assert c.orientation in p.feasible_axes
            assert c.length == pytest.approx(polyline_length(c.waypoints), rel=1e-9, abs=1e-12)
            assert c.turns == independent_turns(c.waypoints) == count_turns(c.waypoints)
            assert coverage_ratio(p.region, c.waypoints, CoverageParams(0.99, 1.0)) >= 0.99
            rev = c.reversed()
            match = [d for d in cs if d.waypoints == rev.waypoints]
            assert match and match[0].length == pytest.approx(c.length) and match[0].turns == c.turns


def test_boundary_connector_stays_inside():
    for p in random_partitions(9, 15):
        shape = p.region.geometry()
        for c in candidates(p, "boundary"):
            from shapely.geometry import LineString
            if len(c.waypoints) > 1:
                assert shape.buffer(1e-9).covers(LineString(c.waypoints))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.sampled_from([0.5, 1.0, 10.0]))
def test_rectangle_length_formula(cols, rows, w):
    for c in candidates(part(rect(cols, rows, w))):
        n_tracks, span = (rows, cols) if c.orientation == HORIZONTAL else (cols, rows)
        assert c.length == pytest.approx(n_tracks * span * w + (n_tracks - 1) * w, rel=1e-12)


def test_candidate_serialises():
    c = candidates(part(rect(2, 2)))[0]
    d = c.to_dict()
    assert d["entry"] == list(c.entry) and d["turns"] == c.turns
    assert isinstance(c, SweepCandidate)
