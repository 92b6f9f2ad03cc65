"""Benchmark corpus, pipeline execution and overhead tables."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np
import shapely
from shapely import affinity
from shapely.geometry import Polygon, box

from .config import PlannerConfig
from .decompose import (Partition, PartitionSet, bcd_decompose, decompose, merge_pass,
                        neighbor_map)
from .errors import CoverageError, IncompleteMatrixError, InvalidROIError, InvalidSpecError
from .io import partition_set_to_document
from .kinodynamics import TimingProfile, time_parameterize
from .roi import CellRegion, GridSpec, PolygonROI, connected_components, coverage_ratio, rasterize
from .router import GlobalPlan, nn_baseline, route
from .svg import render_svg
from .sweep import candidates

FAMILIES = ("rect", "l", "u", "comb", "staircase", "ring", "multihole", "branched")
DECOMPOSERS = ("ours", "bcd", "none")
OPTIMIZERS = ("dp", "ga", "nn")
DEFAULT_PIPELINES = ("ours-dp", "ours-ga", "bcd-dp", "bcd-ga", "nn")


# ---------------------------------------------------------------- corpus

def _ring(poly) -> list[tuple[float, float]]:
    return [(round(x, 6), round(y, 6)) for x, y in poly.exterior.coords[:-1]]


def _rect_union(rects) -> Polygon:
    geom = shapely.union_all([box(*r) for r in rects])
    if geom.geom_type != "Polygon":
        raise InvalidROIError("pieces do not form one polygon")
    return Polygon(geom.exterior)


def _shape(family: str, rng: np.random.Generator):
    """Outer polygon and hole polygons in cell units."""
    U = lambda lo, hi: float(rng.uniform(lo, hi))
    holes = []
    if family == "rect":
        outer = box(0, 0, U(4, 18), U(3, 14))
    elif family == "l":
        W, H = U(8, 18), U(8, 16)
        outer = _rect_union([(0, 0, W, U(2.5, H / 2)), (0, 0, U(2.5, W / 2), H)])
    elif family == "u":
        W, H = U(8, 18), U(6, 15)
        arm_l, arm_r, base = U(2, W / 3), U(2, W / 3), U(2, H / 2)
        outer = _rect_union([(0, 0, W, base), (0, 0, arm_l, H), (W - arm_r, 0, W, U(base + 2, H))])
    elif family == "comb":
        teeth = int(rng.integers(2, 5))
        rects, x = [], 0.0
        base = U(2, 4)
        for _ in range(teeth):
            tw = U(1.6, 3.5)
            rects.append((x, 0, x + tw, base + U(3, 10)))
            x += tw + U(1.6, 4)
        rects.append((0, 0, x - U(0, 1.5), base))
        outer = _rect_union(rects)
    elif family == "staircase":
        steps = int(rng.integers(3, 7))
        dx = [U(1.5, 4) for _ in range(steps)]
        dy = [U(1.5, 4) for _ in range(steps)]
        rects, x, y = [], sum(dx), 0.0
        for k in range(steps):
            y += dy[k]
            rects.append((0, 0, x, y))
            x -= dx[k]
        outer = _rect_union(rects)
    elif family == "ring":
        W, H = U(7, 18), U(7, 16)
        mx0, my0 = U(1.3, 2.5), U(1.3, 2.5)
        mx1, my1 = U(1.3, 2.5), U(1.3, 2.5)
        outer = box(0, 0, W, H)
        if W - mx0 - mx1 < 2.5 or H - my0 - my1 < 2.5:
            mx0 = mx1 = my0 = my1 = 1.3
        holes = [box(mx0, my0, W - mx1, H - my1)]
    elif family == "multihole":
        n = int(rng.integers(14, 26))
        R = U(6, 10)
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = R * (1 + 0.25 * rng.uniform(-1, 1, n))
        outer = Polygon(np.c_[R + rad * np.cos(ang), R + rad * np.sin(ang)]).buffer(0)
        if outer.geom_type != "Polygon":
            outer = max(outer.geoms, key=lambda g: g.area)
        outer = Polygon(outer.exterior)
        for _ in range(int(rng.integers(1, 4))):
            for _attempt in range(30):
                s = U(1.0, 3.0)
                cx, cy = U(0, 2 * R), U(0, 2 * R)
                hole = affinity.rotate(box(cx - s / 2, cy - s / 2, cx + s / 2, cy + s / 2), U(0, 90))
                if outer.buffer(-1.0).contains(hole) and all(hole.distance(h) > 1.0 for h in holes):
                    holes.append(hole)
                    break
    elif family == "branched":
        L = U(14, 26)
        t = U(1.5, 3)
        rects = [(0, 0, L, t)]
        x = U(1, 3)
        while x < L - 2:
            bw = U(1.3, 2.5)
            up = bool(rng.integers(0, 2))
            bl = U(2, 7)
            rects.append((x, t, x + bw, t + bl) if up else (x, -bl, x + bw, 0))
            x += bw + U(2, 5)
        outer = _rect_union(rects)
        outer = Polygon(affinity.rotate(outer, U(-25, 25), origin="centroid").exterior)
    else:
        raise ValueError(f"unknown family {family!r}")
    if family not in ("branched", "multihole") and rng.random() < 0.35:
        # mild rotation so boundaries rasterize raggedly
        angle = U(-12, 12)
        c = outer.centroid
        outer = affinity.rotate(outer, angle, origin=c)
        holes = [affinity.rotate(h, angle, origin=c) for h in holes]
    return outer, holes


def generate_corpus(seed: int = 1, families: Optional[Sequence[str]] = None, count: int = 13,
                    cell_size: float = 10.0) -> list[PolygonROI]:
    """Deterministic parametric polygons cycling through ``families``."""
    if count < 1:
        raise InvalidSpecError("count must be >= 1")
    families = tuple(families or FAMILIES)
    for f in families:
        if f not in FAMILIES:
            raise InvalidSpecError(f"unknown family {f!r}; choose from {FAMILIES}")
    out = []
    for k in range(count):
        family = families[k % len(families)]
        rng = np.random.default_rng([seed, k])
        for attempt in range(50):
            try:
                outer, holes = _shape(family, rng)
                ox, oy = rng.uniform(0, 1, 2) * cell_size + 1000.0
                sc = lambda g: affinity.translate(affinity.scale(g, cell_size, cell_size, origin=(0, 0)), ox, oy)
                roi = PolygonROI(tuple(_ring(sc(outer))), tuple(tuple(_ring(sc(h))) for h in holes),
                                 f"{family}-{k:03d}")
                rasterize(roi, GridSpec.covering(roi, cell_size))
                break
            except (InvalidROIError, ValueError):
                continue
        else:
            raise RuntimeError(f"could not generate a valid {family} polygon")
        out.append(roi)
    return out


# ---------------------------------------------------------------- pipelines

@dataclass(frozen=True)
class PipelineSpec:
    decomposer: str
    optimizer: str
    config: PlannerConfig = field(default_factory=PlannerConfig)

    def __post_init__(self):
        if self.decomposer not in DECOMPOSERS:
            raise InvalidSpecError(f"decomposer must be one of {DECOMPOSERS}")
        if self.optimizer not in OPTIMIZERS:
            raise InvalidSpecError(f"optimizer must be one of {OPTIMIZERS}")
        if (self.decomposer == "none") != (self.optimizer == "nn"):
            raise InvalidSpecError("the nn optimizer pairs only with decomposer 'none' and vice versa")

    @property
    def id(self) -> str:
        return "nn" if self.optimizer == "nn" else f"{self.decomposer}-{self.optimizer}"

    @classmethod
    def parse(cls, pipeline_id: str, config: Optional[PlannerConfig] = None) -> "PipelineSpec":
        config = config or PlannerConfig()
        if pipeline_id == "nn":
            return cls("none", "nn", config)
        try:
            dec, opt = pipeline_id.split("-")
        except ValueError:
            raise InvalidSpecError(f"pipeline id {pipeline_id!r} is not '<decomposer>-<optimizer>' or 'nn'") from None
        return cls(dec, opt, config)


@dataclass(frozen=True)
class BenchmarkRecord:
    polygon: str
    pipeline: str
    length: float
    turns: int
    time: float
    partitions: int
    cost: float
    coverage: float
    valid: bool
    planning_seconds: float


@dataclass
class PipelineResult:
    record: BenchmarkRecord
    region: CellRegion
    partitions: Optional[PartitionSet]
    plan: GlobalPlan
    timing: TimingProfile
    roi: PolygonROI

    def svg(self) -> str:
        return render_svg(self.region, self.partitions, self.plan.stitched, self.plan.connectors, self.roi)

    def plan_document(self) -> dict:
        doc = self.plan.to_dict(f"{self.roi.id}/{self.record.pipeline}")
        doc["metrics"] = {
            "length": self.record.length, "turns": self.record.turns, "time": self.record.time,
            "partitions": self.record.partitions, "cost": self.record.cost,
            "coverage": self.record.coverage,
        }
        return doc


def combine_partition_sets(sets: Sequence[PartitionSet], region: CellRegion, method: str) -> PartitionSet:
    """Pool per-component partition sets under global ids."""
    parts, cuts = [], []
    for ps in sets:
        cuts.extend(ps.cuts)
        for p in ps.partitions:
            parts.append(p)
    nbrs = neighbor_map([p.region for p in parts])
    pooled = tuple(Partition(k, p.region, p.feasible_axes, frozenset(nb)) for k, (p, nb) in enumerate(zip(parts, nbrs)))
    return PartitionSet(pooled, region, method, tuple(cuts))


def decompose_region(region: CellRegion, method: str) -> PartitionSet:
    """Decompose each 4-connected component and pool the partitions."""
    sets = []
    for comp in connected_components(region):
        if method == "ours":
            sets.append(merge_pass(decompose(comp)))
        elif method == "bcd":
            sets.append(bcd_decompose(comp))
        else:
            raise InvalidSpecError(f"no decomposition for method {method!r}")
    return combine_partition_sets(sets, region, method)


def run_pipeline(roi: PolygonROI, spec: PipelineSpec, check_coverage: bool = True) -> PipelineResult:
    """rasterize -> decompose (+merge) -> candidates -> route -> time -> coverage check."""
    cfg = spec.config
    t0 = time.perf_counter()
    w = cfg.width
    region = rasterize(roi, GridSpec.covering(roi, w))
    parts = None
    if spec.decomposer == "none":
        plan = nn_baseline(region, cfg.cost_params)
        n_parts = 0
    else:
        parts = decompose_region(region, spec.decomposer)
        cands = [candidates(p) for p in parts.partitions]
        plan = route(parts.partitions, cands, cfg.cost_params, method=spec.optimizer,
                     ga_config=cfg.ga_config(), limit=cfg.exact_limit)
        n_parts = len(parts)
    timing = time_parameterize(plan.stitched, cfg.limits)
    elapsed = time.perf_counter() - t0
    cov = coverage_ratio(region, plan.stitched, cfg.coverage_params)
    length, turns = plan.length, plan.turns
    record = BenchmarkRecord(roi.id, spec.id, length, turns, timing.total, n_parts,
                             length + cfg.rho * turns, cov, cov >= cfg.alpha, elapsed)
    result = PipelineResult(record, region, parts, plan, timing, roi)
    if check_coverage and not record.valid:
        diag = {"svg": result.svg(), "plan": result.plan_document()}
        if parts is not None:
            diag["partitions"] = partition_set_to_document(parts, roi.id)
        raise CoverageError(f"{roi.id}/{spec.id}: coverage {cov:.4f} below alpha {cfg.alpha}", cov, diag)
    return result


def run_benchmark(rois: Sequence[PolygonROI], pipelines: Sequence[str], config: PlannerConfig,
                  keep_results: bool = False):
    """Every (polygon, pipeline) pair; raises on the first coverage failure."""
    records, results = [], []
    for roi in rois:
        for pid in pipelines:
            res = run_pipeline(roi, PipelineSpec.parse(pid, config))
            records.append(res.record)
            if keep_results:
                results.append(res)
    return (records, results) if keep_results else records


# ---------------------------------------------------------------- metrics

def overhead(value: float, best: float) -> float:
    """Relative excess ``(M - M_min) / M_min``."""
    if not best > 0:
        raise ValueError(f"best value must be positive, got {best}")
    if value < best * (1 - 1e-12):
        raise ValueError(f"value {value} is below the supposed minimum {best}")
    return max(0.0, (value - best) / best)


METRICS = ("time", "length", "turns")


@dataclass(frozen=True)
class OverheadRow:
    pipeline: str
    mu_time: float
    mu_length: float
    mu_turns: float
    wins: int
    top3: int


@dataclass(frozen=True)
class OverheadTable:
    overheads: dict  # (polygon, pipeline) -> {metric: overhead}
    rows: tuple[OverheadRow, ...]

    def format(self) -> str:
        lines = [f"{'pipeline':<10} {'mu_T%':>8} {'mu_L%':>8} {'mu_K%':>8} {'win':>4} {'top3':>5}"]
        for r in self.rows:
            lines.append(f"{r.pipeline:<10} {100 * r.mu_time:8.2f} {100 * r.mu_length:8.2f} "
                         f"{100 * r.mu_turns:8.2f} {r.wins:4d} {r.top3:5d}")
        return "\n".join(lines)


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def aggregate(records: Sequence[BenchmarkRecord]) -> OverheadTable:
    """Per-polygon overheads, per-pipeline means, wins and top-3 counts on time.

    Tied pipelines all receive the win. A zero per-polygon best (e.g. no turns)
    is normalised by 1 instead.
    """
    polygons = sorted({r.polygon for r in records})
    pipelines = sorted({r.pipeline for r in records})
    table = {(r.polygon, r.pipeline): r for r in records}
    missing = [(p, q) for p in polygons for q in pipelines if (p, q) not in table]
    if missing:
        raise IncompleteMatrixError(f"missing records for {missing[:5]}{'...' if len(missing) > 5 else ''}")
    over = {}
    wins = {q: 0 for q in pipelines}
    top3 = {q: 0 for q in pipelines}
    for poly in polygons:
        recs = {q: table[(poly, q)] for q in pipelines}
        for metric in METRICS:
            best = min(getattr(r, metric) for r in recs.values())
            for q, r in recs.items():
                v = getattr(r, metric)
                o = overhead(v, best) if best > 0 else float(v - best)
                over.setdefault((poly, q), {})[metric] = o
        times = {q: r.time for q, r in recs.items()}
        for q, t in times.items():
            better = sum(1 for t2 in times.values() if t2 < t and not _tied(t2, t))
            if better == 0:
                wins[q] += 1
            if better < 3:
                top3[q] += 1
    rows = []
    for q in pipelines:
        means = [float(np.mean([over[(p, q)][m] for p in polygons])) for m in METRICS]
        rows.append(OverheadRow(q, *means, wins[q], top3[q]))
    rows.sort(key=lambda r: (r.mu_time, r.pipeline))
    return OverheadTable(over, tuple(rows))


# ---------------------------------------------------------------- CSV

_FIELDS = [f.name for f in fields(BenchmarkRecord)]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: Iterable[BenchmarkRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_FIELDS)
    for r in records:
        writer.writerow([_fmt(getattr(r, f)) for f in _FIELDS])
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchmarkRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != _FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(BenchmarkRecord(
            polygon=row["polygon"], pipeline=row["pipeline"], length=float(row["length"]),
            turns=int(row["turns"]), time=float(row["time"]), partitions=int(row["partitions"]),
            cost=float(row["cost"]), coverage=float(row["coverage"]), valid=row["valid"] == "true",
            planning_seconds=float(row["planning_seconds"]),
        ))
    return out
