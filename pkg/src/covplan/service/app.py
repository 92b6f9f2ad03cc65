"""HTTP front end over the planning pipeline."""

from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import PipelineSpec, aggregate, decompose_region, generate_corpus, records_to_csv, run_pipeline
from ..config import PlannerConfig
from ..errors import CoverageError, CovPlanError
from ..io import partition_set_to_document
from ..roi import GridSpec, PolygonROI, coverage_ratio, rasterize
from ..svg import render_svg
from . import schemas


def _roi(model: schemas.PolygonModel) -> PolygonROI:
    return PolygonROI.from_dict(model.model_dump())


def _config(model) -> PlannerConfig:
    if model is None:
        return PlannerConfig()
    return PlannerConfig.from_dict(model.model_dump(exclude_none=True))


def create_app() -> FastAPI:
    app = FastAPI(title="covplan", version=__version__)

    @app.exception_handler(CoverageError)
    async def coverage_failed(request: Request, exc: CoverageError):
        return JSONResponse(status_code=422, content={
            "error": "CoverageError", "detail": str(exc), "coverage": exc.ratio,
            "diagnostics": exc.diagnostics})

    @app.exception_handler(CovPlanError)
    async def planning_failed(request: Request, exc: CovPlanError):
        return JSONResponse(status_code=422, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/plan", response_model=schemas.PlanResponse)
    def plan(req: schemas.PlanRequest):
        cfg = _config(req.config)
        result = run_pipeline(_roi(req.roi), PipelineSpec.parse(req.pipeline, cfg))
        out = {"plan": result.plan_document()}
        if req.include_partitions and result.partitions is not None:
            out["partitions"] = partition_set_to_document(result.partitions, req.roi.id)
        if req.include_svg:
            out["svg"] = result.svg()
        return out

    @app.post("/decompose", response_model=schemas.DecomposeResponse)
    def decompose(req: schemas.DecomposeRequest):
        cfg = _config(req.config)
        roi = _roi(req.roi)
        region = rasterize(roi, GridSpec.covering(roi, cfg.width))
        parts = decompose_region(region, req.method)
        out = {"partitions": partition_set_to_document(parts, roi.id)}
        if req.include_svg:
            out["svg"] = render_svg(region, parts, roi=roi)
        return out

    @app.post("/gen", response_model=schemas.GenResponse)
    def gen(req: schemas.GenRequest):
        rois = generate_corpus(req.seed, req.families, req.count, req.cell_size)
        return {"polygons": [r.to_dict() for r in rois]}

    @app.post("/verify", response_model=schemas.VerifyResponse)
    def verify(req: schemas.VerifyRequest):
        cfg = _config(req.config)
        roi = _roi(req.roi)
        region = rasterize(roi, GridSpec.covering(roi, cfg.width))
        ratio = coverage_ratio(region, [tuple(p) for p in req.waypoints], cfg.coverage_params)
        return {"coverage": ratio, "alpha": cfg.alpha, "passed": ratio >= cfg.alpha, "cells": len(region)}

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench(req: schemas.BenchRequest):
        cfg = _config(req.config)
        if req.rois:
            rois = [_roi(r) for r in req.rois]
        else:
            c = req.corpus or schemas.GenRequest()
            rois = generate_corpus(c.seed, c.families, c.count, c.cell_size)
        records, svgs = [], {}
        for roi in rois:
            for pid in req.pipelines:
                res = run_pipeline(roi, PipelineSpec.parse(pid, cfg))
                records.append(res.record)
                if req.include_svgs:
                    svgs[f"{roi.id}__{res.record.pipeline}"] = res.svg()
        table = aggregate(records)
        return {"csv": records_to_csv(records), "table": [asdict(r) for r in table.rows],
                "summary": table.format(), "svgs": svgs}

    return app


app = create_app()
