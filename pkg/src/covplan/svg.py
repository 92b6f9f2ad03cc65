"""Minimal SVG debug renderings of regions, partitions, cuts and plans."""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

from .decompose import HORIZONTAL, PartitionSet
from .roi import CellRegion, PolygonROI

PALETTE = ("#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
           "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f")

STYLE = """
.cell{stroke:#999;stroke-width:0.5}
.roi{fill:none;stroke:#222;stroke-width:1.5}
.hole{fill:none;stroke:#222;stroke-width:1;stroke-dasharray:4 2}
.band{fill:#f00;fill-opacity:0.12;stroke:none}
.cut{stroke:#000;stroke-width:1.5;stroke-dasharray:6 3}
.track{fill:none;stroke:#1f4e9c;stroke-width:1.2}
.connector{fill:none;stroke:#e00000;stroke-width:1.6}
.label{font:10px sans-serif;fill:#000}
"""


class _Canvas:
    def __init__(self, bounds, size=800.0, margin=10.0):
        x0, y0, x1, y1 = bounds
        span = max(x1 - x0, y1 - y0, 1e-9)
        self.s = (size - 2 * margin) / span
        self.x0, self.y1, self.m = x0, y1, margin
        self.w = (x1 - x0) * self.s + 2 * margin
        self.h = (y1 - y0) * self.s + 2 * margin
        self.items: list[str] = []

    def pt(self, x, y):
        return self.m + (x - self.x0) * self.s, self.m + (self.y1 - y) * self.s

    def rect(self, x0, y0, x1, y1, cls, fill=None):
        ax, ay = self.pt(x0, y1)
        f = f' fill="{fill}"' if fill else ""
        self.items.append(f'<rect class="{cls}" x="{ax:.2f}" y="{ay:.2f}" '
                          f'width="{(x1 - x0) * self.s:.2f}" height="{(y1 - y0) * self.s:.2f}"{f}/>')

    def poly(self, pts, cls, closed=False):
        coords = " ".join("%.2f,%.2f" % self.pt(x, y) for x, y in pts)
        tag = "polygon" if closed else "polyline"
        self.items.append(f'<{tag} class="{cls}" points="{coords}"/>')

    def text(self, x, y, s):
        ax, ay = self.pt(x, y)
        self.items.append(f'<text class="label" x="{ax:.2f}" y="{ay:.2f}">{s}</text>')

    def render(self) -> str:
        body = "\n".join(self.items)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
                f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">\n<style>{STYLE}</style>\n{body}\n</svg>\n')


def render_svg(region: CellRegion, partitions: Optional[PartitionSet] = None,
               waypoints: Optional[Sequence] = None, connectors: Iterable = (),
               roi: Optional[PolygonROI] = None, show_bands: bool = True) -> str:
    """Cells coloured by partition, cut lines, shaded gap bands, the flown
    path and inter-partition connectors (stroke class ``connector``)."""
    bounds = region.bounds
    if roi is not None:
        rx0, ry0, rx1, ry1 = roi.bounds
        bounds = (min(bounds[0], rx0), min(bounds[1], ry0), max(bounds[2], rx1), max(bounds[3], ry1))
    cv = _Canvas(bounds)
    owner = {}
    if partitions is not None:
        for p in partitions.partitions:
            for c in p.region.cells:
                owner[c] = p.id
    for c in region.sorted_cells:
        pid = owner.get(c)
        fill = PALETTE[pid % len(PALETTE)] if pid is not None else "#e0e0e0"
        cv.rect(*region.grid.cell_box(c), "cell", fill)
    if partitions is not None:
        for rec in partitions.cuts:
            x0, y0, x1, y1 = rec.bounds
            if show_bands:
                for report in rec.reports:
                    if report.axis == rec.cut.axis:
                        for band in report.bands:
                            cv.rect(*band.bounding_box, "band")
            if rec.cut.axis == HORIZONTAL:
                cv.poly([(x0, rec.cut.coordinate), (x1, rec.cut.coordinate)], "cut")
            else:
                cv.poly([(rec.cut.coordinate, y0), (rec.cut.coordinate, y1)], "cut")
        for p in partitions.partitions:
            x0, y0, x1, y1 = p.region.bounds
            cv.text(x0 + 0.1 * region.grid.cell_size, y1 - 0.6 * region.grid.cell_size, str(p.id))
    if roi is not None:
        cv.poly(roi.outer, "roi", closed=True)
        for h in roi.holes:
            cv.poly(h, "hole", closed=True)
    if waypoints:
        cv.poly(waypoints, "track")
    for a, b in connectors:
        cv.poly([a, b], "connector")
    return cv.render()
