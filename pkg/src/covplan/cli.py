"""Command-line client for the planning service.

Runs the service in-process by default; ``--server URL`` talks to a running
instance instead. Exit codes: 0 ok, 1 coverage failure, 2 bad input.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path
from typing import Optional

import click
import yaml

EXIT_COVERAGE = 1
EXIT_INPUT = 2


class Client:
    def __init__(self, server: Optional[str] = None):
        if server:
            import httpx
            self._http = httpx.Client(base_url=server, timeout=None)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app
            self._http = TestClient(app)

    def post(self, path: str, body: dict):
        r = self._http.post(path, json=body)
        return r.status_code, r.json()


def _read_doc(path: str):
    with open(path) as fh:
        return yaml.safe_load(fh)


def _polygons(path: str) -> list[dict]:
    doc = _read_doc(path)
    if isinstance(doc, dict) and "polygons" in doc:
        return list(doc["polygons"])
    return list(doc) if isinstance(doc, list) else [doc]


def _config(ctx_opts: dict) -> dict:
    cfg = dict(_read_doc(ctx_opts["config"]) or {}) if ctx_opts.get("config") else {}
    if ctx_opts.get("width") is not None:
        cfg["footprint"] = {"width": ctx_opts["width"]}
    for key in ("alpha", "rho", "seed", "exact_limit"):
        if ctx_opts.get(key) is not None:
            cfg[key] = ctx_opts[key]
    return cfg


def _write(path: Optional[str], text: str):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _fail(status: int, body: dict, diag_dir: Optional[str]) -> int:
    click.echo(f"error: {body.get('error', status)}: {body.get('detail')}", err=True)
    if body.get("error") == "CoverageError":
        if diag_dir:
            d = Path(diag_dir)
            d.mkdir(parents=True, exist_ok=True)
            diag = body.get("diagnostics", {})
            if "svg" in diag:
                (d / "failure.svg").write_text(diag["svg"])
            for key in ("plan", "partitions"):
                if key in diag:
                    (d / f"failure_{key}.json").write_text(json.dumps(diag[key], indent=2, sort_keys=True))
            click.echo(f"diagnostics written to {d}", err=True)
        return EXIT_COVERAGE
    return EXIT_INPUT


def config_options(f):
    f = click.option("--config", "config", type=click.Path(exists=True, dir_okay=False),
                     help="YAML or JSON planner config")(f)
    f = click.option("--width", type=float, help="footprint width w (m)")(f)
    f = click.option("--alpha", type=float, help="required per-cell coverage fraction")(f)
    f = click.option("--rho", type=float, help="turn penalty (m per turn)")(f)
    f = click.option("--seed", type=int)(f)
    f = click.option("--exact-limit", "exact_limit", type=int, help="max partitions for exact routing")(f)
    return f


@click.group()
@click.option("--server", envvar="COVPLAN_SERVER", default=None, help="base URL of a running service")
@click.pass_context
def main(ctx, server):
    """Coverage path planning over polygonal regions."""
    ctx.obj = Client(server)


@main.command()
@click.argument("roi_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--pipeline", default="ours-dp", show_default=True)
@config_options
@click.option("--out", "out", type=click.Path(), help="plan JSON (stdout if omitted)")
@click.option("--svg", "svg", type=click.Path(), help="SVG rendering (one polygon) or directory")
@click.option("--partitions", "parts_out", type=click.Path(), help="partition document JSON")
@click.option("--diagnostics", "diag_dir", type=click.Path(file_okay=False), default="covplan-diagnostics",
              show_default=True)
@click.pass_obj
def plan(client: Client, roi_file, pipeline, out, svg, parts_out, diag_dir, **opts):
    """Plan a coverage path for every polygon in ROI_FILE."""
    cfg = _config(opts)
    polys = _polygons(roi_file)
    plans, parts = [], []
    for poly in polys:
        status, body = client.post("/plan", {"roi": poly, "pipeline": pipeline, "config": cfg,
                                             "include_svg": bool(svg), "include_partitions": bool(parts_out)})
        if status != 200:
            sys.exit(_fail(status, body, diag_dir))
        plans.append(body["plan"])
        if body.get("partitions"):
            parts.append(body["partitions"])
        if svg:
            target = Path(svg) / f"{poly.get('id', 'roi')}.svg" if len(polys) > 1 else Path(svg)
            _write(str(target), body["svg"])
        m = body["plan"]["metrics"]
        click.echo(f"{body['plan']['id']}: L={m['length']:.2f} K={m['turns']} T={m['time']:.2f}s "
                   f"parts={m['partitions']} coverage={m['coverage']:.4f}", err=True)
    doc = plans[0] if len(plans) == 1 else {"plans": plans}
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        _write(out, text)
    else:
        click.echo(text)
    if parts_out:
        _write(parts_out, json.dumps(parts[0] if len(parts) == 1 else {"sets": parts}, indent=2, sort_keys=True))


@main.command()
@click.argument("roi_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["ours", "bcd"]), default="ours", show_default=True)
@config_options
@click.option("--out", type=click.Path())
@click.option("--svg", type=click.Path())
@click.pass_obj
def decompose(client: Client, roi_file, method, out, svg, **opts):
    """Decompose the first polygon of ROI_FILE into partitions."""
    poly = _polygons(roi_file)[0]
    status, body = client.post("/decompose", {"roi": poly, "method": method, "config": _config(opts),
                                              "include_svg": bool(svg)})
    if status != 200:
        sys.exit(_fail(status, body, None))
    text = json.dumps(body["partitions"], indent=2, sort_keys=True)
    _write(out, text) if out else click.echo(text)
    if svg:
        _write(svg, body["svg"])


@main.command()
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--count", type=int, default=13, show_default=True)
@click.option("--family", "families", multiple=True, help="restrict to these families (repeatable)")
@click.option("--cell-size", type=float, default=10.0, show_default=True)
@click.option("--out", type=click.Path())
@click.pass_obj
def gen(client: Client, seed, count, families, cell_size, out):
    """Generate a deterministic benchmark corpus."""
    status, body = client.post("/gen", {"seed": seed, "count": count, "families": list(families) or None,
                                        "cell_size": cell_size})
    if status != 200:
        sys.exit(_fail(status, body, None))
    text = json.dumps({"polygons": body["polygons"]}, indent=2, sort_keys=True)
    _write(out, text) if out else click.echo(text)


@main.command()
@click.argument("roi_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("plan_file", type=click.Path(exists=True, dir_okay=False))
@config_options
@click.pass_obj
def verify(client: Client, roi_file, plan_file, **opts):
    """Check that a plan covers its polygon; exits 1 below alpha."""
    polys = _polygons(roi_file)
    doc = _read_doc(plan_file)
    plans = doc["plans"] if isinstance(doc, dict) and "plans" in doc else [doc]
    if len(plans) != len(polys):
        click.echo(f"error: {len(polys)} polygons but {len(plans)} plans", err=True)
        sys.exit(EXIT_INPUT)
    cfg = _config(opts)
    ok = True
    for poly, p in zip(polys, plans):
        status, body = client.post("/verify", {"roi": poly, "waypoints": p["waypoints"], "config": cfg})
        if status != 200:
            sys.exit(_fail(status, body, None))
        verdict = "ok" if body["passed"] else "FAIL"
        click.echo(f"{poly.get('id', 'roi')}: coverage={body['coverage']:.4f} alpha={body['alpha']} {verdict}")
        ok &= body["passed"]
    if not ok:
        sys.exit(EXIT_COVERAGE)


@main.command()
@click.option("--rois", "roi_file", type=click.Path(exists=True, dir_okay=False),
              help="polygons to run (default: generated corpus)")
@click.option("--corpus-seed", type=int, default=1, show_default=True)
@click.option("--count", type=int, default=13, show_default=True)
@click.option("--pipelines", default="ours-dp,ours-ga,bcd-dp,bcd-ga,nn", show_default=True)
@config_options
@click.option("--csv", "csv_out", type=click.Path(), help="per-run metrics CSV")
@click.option("--summary", "summary_out", type=click.Path(), help="overhead table")
@click.option("--svg-dir", type=click.Path(file_okay=False))
@click.option("--diagnostics", "diag_dir", type=click.Path(file_okay=False), default="covplan-diagnostics",
              show_default=True)
@click.pass_obj
def bench(client: Client, roi_file, corpus_seed, count, pipelines, csv_out, summary_out, svg_dir, diag_dir, **opts):
    """Run every pipeline on every polygon and summarise overheads."""
    body = {"pipelines": [p.strip() for p in pipelines.split(",") if p.strip()], "config": _config(opts),
            "include_svgs": bool(svg_dir)}
    if roi_file:
        body["rois"] = _polygons(roi_file)
    else:
        body["corpus"] = {"seed": corpus_seed, "count": count}
    status, res = client.post("/bench", body)
    if status != 200:
        sys.exit(_fail(status, res, diag_dir))
    _write(csv_out, res["csv"])
    _write(summary_out, res["summary"] + "\n")
    for name, text in res.get("svgs", {}).items():
        _write(str(Path(svg_dir) / f"{name}.svg"), text)
    click.echo(res["summary"])


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn
    uvicorn.run("covplan.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
