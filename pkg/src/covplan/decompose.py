"""Uniaxial-feasibility decomposition of cell regions.

A region is acceptable when it is monotone along at least one cardinal axis:
every horizontal (or every vertical) probe line crosses it in a single
interval. Regions failing both axes are cut at the gap-severity-weighted
band midpoint and the pieces are processed again; a merge pass then fuses
adjacent pieces whose union is still acceptable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import FallbackCutError
from .roi import Cell, CellRegion, connected_components

HORIZONTAL = "horizontal"
VERTICAL = "vertical"
AXES = (HORIZONTAL, VERTICAL)


@dataclass(frozen=True)
class ProbeLine:
    """One probe line placed at the centre of grid band ``index``.

    ``low``/``high`` are the band edges (meters) across the line; ``runs``
    are the occupied cell index runs ``(first, last)`` along it.
    """

    index: int
    coordinate: float
    low: float
    high: float
    intervals: tuple[tuple[float, float], ...]
    runs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AxisProbe:
    axis: str
    lines: tuple[ProbeLine, ...]


@dataclass(frozen=True)
class GapBand:
    axis_interval: tuple[float, float]
    bounding_box: tuple[float, float, float, float]


@dataclass(frozen=True)
class GapReport:
    axis: str
    severity: float
    bands: tuple[GapBand, ...]


@dataclass(frozen=True)
class CutLine:
    axis: str
    coordinate: float
    index: int  # grid line index: row boundary for horizontal cuts, column boundary for vertical

    def to_dict(self) -> dict:
        return {"axis": self.axis, "coordinate": self.coordinate, "index": self.index}


@dataclass(frozen=True)
class Partition:
    id: int
    region: CellRegion
    feasible_axes: frozenset
    neighbors: frozenset = frozenset()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "feasible_axes": sorted(self.feasible_axes),
            "neighbors": sorted(self.neighbors),
            "cells": [list(c) for c in self.region.sorted_cells],
        }


@dataclass(frozen=True)
class CutRecord:
    """Debug trace of one cut: the gap reports that chose it."""

    cut: CutLine
    reports: tuple[GapReport, GapReport]
    bounds: tuple[float, float, float, float]


@dataclass(frozen=True)
class PartitionSet:
    partitions: tuple[Partition, ...]
    source_region: CellRegion
    method: str = "ours"
    cuts: tuple[CutRecord, ...] = ()

    def __len__(self):
        return len(self.partitions)

    def __iter__(self):
        return iter(self.partitions)

    def __getitem__(self, k):
        return self.partitions[k]


def _runs_from_mask(mask: np.ndarray) -> list[list[tuple[int, int]]]:
    """Occupied runs per mask row as inclusive ``(start, end)`` column offsets."""
    nr, nc = mask.shape
    padded = np.zeros((nr, nc + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded, axis=1)
    sr, sc = np.nonzero(d == 1)
    er, ec = np.nonzero(d == -1)
    out: list[list[tuple[int, int]]] = [[] for _ in range(nr)]
    for r, s, e in zip(sr.tolist(), sc.tolist(), ec.tolist()):
        out[r].append((s, e - 1))
    return out


def axis_probe(region: CellRegion, axis: str) -> AxisProbe:
    """Probe lines at the centre of every grid band crossing the region.

    Horizontal probes are the lines ``y = const`` (one per row); vertical
    probes are ``x = const`` (one per column).
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}")
    g = region.grid
    w = g.cell_size
    mask, c0, r0 = region.mask()
    if axis == VERTICAL:
        mask = mask.T
        across0, along0 = c0, r0
        across_origin, along_origin = g.origin[0], g.origin[1]
    else:
        across0, along0 = r0, c0
        across_origin, along_origin = g.origin[1], g.origin[0]
    lines = []
    for k, runs in enumerate(_runs_from_mask(mask)):
        idx = across0 + k
        low = across_origin + idx * w
        abs_runs = tuple((along0 + s, along0 + e) for s, e in runs)
        intervals = tuple((along_origin + s * w, along_origin + (e + 1) * w) for s, e in abs_runs)
        lines.append(ProbeLine(idx, low + 0.5 * w, low, low + w, intervals, abs_runs))
    return AxisProbe(axis, tuple(lines))


def is_monotone(probe: AxisProbe) -> bool:
    """True iff every probe line meets the region in exactly one interval."""
    return all(len(line.intervals) == 1 for line in probe.lines)


def feasibility(region: CellRegion) -> frozenset:
    """Axes along which ``region`` is monotone; empty means it must be cut."""
    return frozenset(a for a in AXES if is_monotone(axis_probe(region, a)))


def gap_severity(probe: AxisProbe) -> GapReport:
    """Total out-of-region length crossed by the probe lines, plus the bands
    of every line with more than one interval."""
    total = 0.0
    bands = []
    for line in probe.lines:
        iv = line.intervals
        if len(iv) < 2:
            continue
        total += sum(iv[k + 1][0] - iv[k][1] for k in range(len(iv) - 1))
        lo_along, hi_along = iv[0][0], iv[-1][1]
        if probe.axis == HORIZONTAL:
            bbox = (lo_along, line.low, hi_along, line.high)
        else:
            bbox = (line.low, lo_along, line.high, hi_along)
        bands.append(GapBand((line.low, line.high), bbox))
    return GapReport(probe.axis, total, tuple(bands))


def _snap(raw: float, origin: float, w: float, lo_index: int, hi_index: int) -> int:
    """Nearest grid line index in ``[lo_index, hi_index]``; ties go low."""
    t = round((raw - origin) / w, 9)
    k = math.ceil(t - 0.5)
    return min(max(k, lo_index), hi_index)


def _cut_on_axis(region: CellRegion, report: GapReport) -> CutLine:
    g = region.grid
    w = g.cell_size
    c0, r0, c1, r1 = region.cell_bounds
    lows = [b.axis_interval[0] for b in report.bands]
    highs = [b.axis_interval[1] for b in report.bands]
    raw = 0.5 * (min(lows) + max(highs))
    if report.axis == HORIZONTAL:
        lo, hi, origin = r0 + 1, r1, g.origin[1]
    else:
        lo, hi, origin = c0 + 1, c1, g.origin[0]
    if lo > hi:
        raise FallbackCutError(f"no interior {report.axis} grid line in a one-band-wide region")
    k = _snap(raw, origin, w, lo, hi)
    return CutLine(report.axis, origin + k * w, k)


def select_cut(region: CellRegion, reports: Sequence[GapReport]) -> CutLine:
    """Cut through the midpoint of the union of gap bands on the more severe axis.

    ``reports`` holds the horizontal and vertical :class:`GapReport` (any
    order). Horizontal wins ties. The coordinate is snapped to the nearest
    grid line strictly inside the region's bounding box.
    """
    by_axis = {r.axis: r for r in reports}
    gh, gv = by_axis[HORIZONTAL], by_axis[VERTICAL]
    if gh.severity >= gv.severity and gh.bands:
        return _cut_on_axis(region, gh)
    if gv.bands:
        return _cut_on_axis(region, gv)
    if gh.bands:
        return _cut_on_axis(region, gh)
    raise FallbackCutError("region has no gap bands on either axis")


def split_region(region: CellRegion, cut: CutLine) -> tuple[CellRegion, CellRegion]:
    """Cells strictly below/left of the cut line, and cells at-or-above/right."""
    k = 1 if cut.axis == HORIZONTAL else 0
    low = [c for c in region.cells if c[k] < cut.index]
    high = [c for c in region.cells if c[k] >= cut.index]
    return region.with_cells(low), region.with_cells(high)


def _fallback_cut(region: CellRegion, reports: Sequence[GapReport], failed: str) -> CutLine:
    """Cut at a grid line bounding the first gap band, preferring the axis
    that did not fail."""
    c0, r0, c1, r1 = region.cell_bounds
    g = region.grid
    w = g.cell_size
    for report in sorted(reports, key=lambda r: r.axis == failed):
        if report.axis == HORIZONTAL:
            lo, hi, origin = r0 + 1, r1, g.origin[1]
        else:
            lo, hi, origin = c0 + 1, c1, g.origin[0]
        for band in report.bands:
            for edge in band.axis_interval:
                k = round((edge - origin) / w)
                if lo <= k <= hi:
                    return CutLine(report.axis, origin + k * w, k)
    raise FallbackCutError("no grid line available for a fallback cut")


def neighbor_map(regions: Sequence[CellRegion]) -> list[set[int]]:
    """Edge-sharing adjacency between disjoint regions."""
    owner: dict[Cell, int] = {}
    for k, reg in enumerate(regions):
        for c in reg.cells:
            owner[c] = k
    nbrs: list[set[int]] = [set() for _ in regions]
    for (c, r), k in owner.items():
        for nb in ((c + 1, r), (c, r + 1)):
            j = owner.get(nb)
            if j is not None and j != k:
                nbrs[k].add(j)
                nbrs[j].add(k)
    return nbrs


def _build_set(regions: Sequence[CellRegion], source: CellRegion, method: str,
               cuts: Sequence[CutRecord] = (), axes: Optional[Sequence[frozenset]] = None) -> PartitionSet:
    order = sorted(range(len(regions)), key=lambda k: regions[k].anchor)
    regions = [regions[k] for k in order]
    axes = [feasibility(r) for r in regions] if axes is None else [axes[k] for k in order]
    nbrs = neighbor_map(regions)
    parts = tuple(
        Partition(k, reg.with_cells(reg.cells, f"{source.component_id}/p{k}"), frozenset(ax), frozenset(nb))
        for k, (reg, ax, nb) in enumerate(zip(regions, axes, nbrs))
    )
    return PartitionSet(parts, source, method, tuple(cuts))


def decompose(region: CellRegion) -> PartitionSet:
    """Recursively cut ``region`` until every piece satisfies the feasibility criterion."""
    if not region.cells:
        raise ValueError("cannot decompose an empty region")
    leaves: list[CellRegion] = []
    leaf_axes: list[frozenset] = []
    cuts: list[CutRecord] = []
    stack = [region]
    budget = len(region.cells)
    while stack:
        piece = stack.pop()
        axes = feasibility(piece)
        if axes:
            leaves.append(piece)
            leaf_axes.append(axes)
            continue
        reports = (gap_severity(axis_probe(piece, HORIZONTAL)), gap_severity(axis_probe(piece, VERTICAL)))
        try:
            cut = select_cut(piece, reports)
        except FallbackCutError as exc:
            cut = _fallback_cut(piece, reports, failed=str(exc))
        low, high = split_region(piece, cut)
        assert low.cells and high.cells, "cut left one side empty"
        cuts.append(CutRecord(cut, reports, piece.bounds))
        assert len(cuts) <= budget, "decomposition failed to terminate"
        children = connected_components(low) + connected_components(high)
        # reversed so the lowest-anchored child is processed first
        stack.extend(reversed(children))
    return _build_set(leaves, region, "ours", cuts, leaf_axes)


def merge_pass(parts: PartitionSet) -> PartitionSet:
    """Fuse adjacent partitions whose union is still acceptable, largest pair first."""
    regions = [p.region for p in parts.partitions]
    axes = [p.feasible_axes for p in parts.partitions]
    rejected: set[tuple[frozenset, frozenset]] = set()
    while True:
        nbrs = neighbor_map(regions)
        pairs = sorted(
            ((i, j) for i in range(len(regions)) for j in nbrs[i] if i < j),
            key=lambda ij: (-(len(regions[ij[0]]) + len(regions[ij[1]])), ij[0], ij[1]),
        )
        merged = False
        for i, j in pairs:
            key = (regions[i].cells, regions[j].cells)
            if key in rejected:
                continue
            union = regions[i].with_cells(regions[i].cells | regions[j].cells)
            ax = feasibility(union)
            if not ax:
                rejected.add(key)
                continue
            regions[i], axes[i] = union, ax
            del regions[j], axes[j]
            merged = True
            break
        if not merged:
            break
    return _build_set(regions, parts.source_region, parts.method, parts.cuts, axes)


def decompose_and_merge(region: CellRegion) -> PartitionSet:
    return merge_pass(decompose(region))


def bcd_decompose(region: CellRegion, sweep: str = "rows") -> PartitionSet:
    """Grid boustrophedon decomposition driven by connectivity events.

    The sweep advances band by band (rows bottom to top by default, or
    columns left to right). A run of occupied cells extends the partition of
    an overlapping run in the previous band only if that run does not split;
    when several such runs merge into one, the lowest continues and the others
    close. Every other run opens a new partition. Each partition therefore holds
    one run per band and is monotone along the sweep-line axis.
    """
    if sweep not in ("rows", "columns"):
        raise ValueError(f"sweep must be 'rows' or 'columns', got {sweep!r}")
    mask, c0, r0 = region.mask()
    if sweep == "columns":
        mask = mask.T
    runs_per_band = _runs_from_mask(mask)
    groups: list[list[tuple[int, int, int]]] = []  # (band, start, end)
    prev: list[tuple[int, int, int]] = []  # (start, end, group id)
    for band, runs in enumerate(runs_per_band):
        successors = [0] * len(prev)
        links = []
        for s, e in runs:
            overl = [k for k, (ps, pe, _) in enumerate(prev) if ps <= e and s <= pe]
            for k in overl:
                successors[k] += 1
            links.append(overl)
        cur = []
        for (s, e), overl in zip(runs, links):
            cont = [k for k in overl if successors[k] == 1]
            if cont:
                gid = prev[cont[0]][2]
            else:
                gid = len(groups)
                groups.append([])
            groups[gid].append((band, s, e))
            cur.append((s, e, gid))
        prev = cur
    regions = []
    for grp in groups:
        cells = []
        for band, s, e in grp:
            for k in range(s, e + 1):
                cells.append((c0 + k, r0 + band) if sweep == "rows" else (c0 + band, r0 + k))
        regions.append(region.with_cells(cells))
    return _build_set(regions, region, "bcd")


def single_partition(region: CellRegion) -> PartitionSet:
    """Wrap a region as one partition without any feasibility requirement."""
    return _build_set([region], region, "none")
