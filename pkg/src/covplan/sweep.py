"""Parallel-track (serpentine) sweep candidates for one partition."""

from __future__ import annotations

from dataclasses import dataclass

from .decompose import HORIZONTAL, VERTICAL, Partition, axis_probe
from .geometry import Point, count_turns, polyline_length, simplify

CORNERS = ("BL", "BR", "TL", "TR")
CONNECTORS = ("direct", "boundary")


@dataclass(frozen=True)
class SweepCandidate:
    partition_id: int
    orientation: str  # direction the tracks run: "horizontal" or "vertical"
    start_corner: str
    waypoints: tuple[Point, ...]
    length: float
    turns: int

    @property
    def entry(self) -> Point:
        return self.waypoints[0]

    @property
    def exit(self) -> Point:
        return self.waypoints[-1]

    @classmethod
    def from_waypoints(cls, partition_id: int, orientation: str, start_corner: str, waypoints) -> "SweepCandidate":
        pts = tuple(simplify(waypoints))
        return cls(partition_id, orientation, start_corner, pts, polyline_length(pts), count_turns(pts))

    def reversed(self) -> "SweepCandidate":
        return SweepCandidate(self.partition_id, self.orientation, self.start_corner,
                              tuple(reversed(self.waypoints)), self.length, self.turns)

    def to_dict(self) -> dict:
        return {
            "partition_id": self.partition_id,
            "orientation": self.orientation,
            "start_corner": self.start_corner,
            "entry": list(self.entry),
            "exit": list(self.exit),
            "length": self.length,
            "turns": self.turns,
            "waypoints": [list(p) for p in self.waypoints],
        }


def track_layout(partition: Partition, orientation: str) -> list[tuple[Point, Point]]:
    """One track per grid band at the band centre, spanning the occupied interval.

    Tracks are ordered by band (bottom to top, or left to right) and each runs
    in the increasing direction.
    """
    if orientation not in partition.feasible_axes:
        raise ValueError(f"partition {partition.id} is not monotone along {orientation!r}")
    probe = axis_probe(partition.region, orientation)
    tracks = []
    for line in probe.lines:
        (lo, hi), = line.intervals
        if orientation == HORIZONTAL:
            tracks.append(((lo, line.coordinate), (hi, line.coordinate)))
        else:
            tracks.append(((line.coordinate, lo), (line.coordinate, hi)))
    return tracks


def _serpentine(tracks, orientation: str, start_corner: str, half: float,
                connector: str = "direct") -> list[Point]:
    # band order and first-track direction encoded by the corner letters
    if orientation == HORIZONTAL:
        bands_descending = start_corner[0] == "T"
        first_reversed = start_corner[1] == "R"
    else:
        bands_descending = start_corner[1] == "R"
        first_reversed = start_corner[0] == "T"
    order = list(reversed(tracks)) if bands_descending else list(tracks)
    step = -half if bands_descending else half
    pts: list[Point] = []
    for k, (a, b) in enumerate(order):
        rev = first_reversed ^ (k % 2 == 1)
        s, e = (b, a) if rev else (a, b)
        if pts and connector == "boundary":
            # connector follows the grid line shared by the two bands
            prev = pts[-1]
            if orientation == HORIZONTAL:
                mid = prev[1] + step
                pts += [(prev[0], mid), (s[0], mid)]
            else:
                mid = prev[0] + step
                pts += [(mid, prev[1]), (mid, s[1])]
        pts += [s, e]
    return pts


def candidates(partition: Partition, connector: str = "direct") -> list[SweepCandidate]:
    """Corner-based serpentine variants for every feasible track orientation.

    Four variants per feasible axis, fewer after removing exact duplicates.
    ``connector`` selects how consecutive tracks are joined: ``"direct"``
    flies straight from one track end to the next track start, ``"boundary"``
    detours along the grid line shared by the two bands.
    """
    if connector not in CONNECTORS:
        raise ValueError(f"connector must be one of {CONNECTORS}")
    half = partition.region.grid.cell_size / 2.0
    out: list[SweepCandidate] = []
    seen = set()
    for orientation in (HORIZONTAL, VERTICAL):
        if orientation not in partition.feasible_axes:
            continue
        tracks = track_layout(partition, orientation)
        for corner in CORNERS:
            cand = SweepCandidate.from_waypoints(partition.id, orientation, corner,
                                                 _serpentine(tracks, orientation, corner, half, connector))
            if cand.waypoints in seen:
                continue
            seen.add(cand.waypoints)
            out.append(cand)
    return out
