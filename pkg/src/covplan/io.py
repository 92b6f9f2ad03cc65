"""JSON documents for ROIs, partition sets and plans.

ROI document::

    {"polygons": [{"id": "field-1",
                   "outer": [[x, y], ...],          # meters, CCW (re-oriented if not)
                   "holes": [[[x, y], ...], ...]}]} # meters, CW

A bare list of polygon objects, or a single polygon object, is also accepted.
Partition documents reuse the polygon object (the outer/holes rings of the
partition's cell union) and add ``feasible_axes``, ``neighbors`` and ``cells``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import shapely

from .decompose import PartitionSet
from .errors import InvalidROIError
from .roi import PolygonROI


def rois_from_document(doc) -> list[PolygonROI]:
    if isinstance(doc, dict) and "polygons" in doc:
        items = doc["polygons"]
    elif isinstance(doc, dict):
        items = [doc]
    elif isinstance(doc, list):
        items = doc
    else:
        raise InvalidROIError("ROI document must be an object or a list of objects")
    return [PolygonROI.from_dict(item) for item in items]


def rois_to_document(rois: Iterable[PolygonROI]) -> dict:
    return {"polygons": [r.to_dict() for r in rois]}


def load_rois(path: str | Path) -> list[PolygonROI]:
    with open(path) as fh:
        return rois_from_document(json.load(fh))


def dump_json(doc, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _rings(region):
    geom = region.geometry()
    polys = list(geom.geoms) if hasattr(geom, "geoms") else [geom]
    poly = max(polys, key=lambda p: p.area)
    poly = shapely.geometry.polygon.orient(poly, 1.0)
    return ([list(p) for p in poly.exterior.coords[:-1]],
            [[list(p) for p in ring.coords[:-1]] for ring in poly.interiors])


def partition_set_to_document(parts: PartitionSet, source_id: str = "roi") -> dict:
    out = []
    for p in parts.partitions:
        outer, holes = _rings(p.region)
        d = p.to_dict()
        d.update({"id": f"{source_id}/p{p.id}", "index": p.id, "outer": outer, "holes": holes})
        out.append(d)
    return {
        "source": source_id,
        "method": parts.method,
        "grid": parts.source_region.grid.to_dict(),
        "cuts": [c.cut.to_dict() for c in parts.cuts],
        "polygons": out,
    }


def dumps_canonical(doc) -> str:
    """Deterministic serialisation used for byte-identity checks."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
