"""
HTTP report service for the two-star lab.

Serves plot-ready mean-field data and runs any lab command from a JSON
RunConfig. One run executes at a time; the mean-field endpoints are cheap
and never wait for it.

Deployment: uvicorn app:app --host 127.0.0.1 --port 8203
"""

from __future__ import annotations

import logging
import threading
import time
from contextlib import asynccontextmanager
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.responses import Response

from meanfield import classify, phase_grid
from report_io import PHASE_COLUMNS, Report, emit, plain_meta
from run_config import ConfigError, RunConfig, parse_grid
from twostar_lab import dispatch

logger = logging.getLogger("twostar-lab")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
PHASE_CELL_CAP = 50_000

# ---------------------------------------------------------------------------
# Run state
# ---------------------------------------------------------------------------
_run_lock = threading.Lock()
_run_in_progress = False
_last_run_stats: dict[str, Any] = {}


def _execute(cfg: RunConfig) -> Report:
    """Run one config under the lock; raises HTTPException(409) when busy."""
    global _run_in_progress, _last_run_stats

    if not _run_lock.acquire(blocking=False):
        raise HTTPException(status_code=409, detail="a run is already in progress")
    try:
        _run_in_progress = True
        logger.info("HTTP run started: %s", cfg.command)
        t0 = time.monotonic()
        report = dispatch(cfg)
        elapsed = time.monotonic() - t0
        _last_run_stats = {
            "command": report.command,
            "records": len(report.records),
            "elapsed_seconds": round(elapsed, 2),
            **report.summary(),
        }
        logger.info("HTTP run finished: %s, %d records in %.1fs", report.command, len(report.records), elapsed)
        return report
    finally:
        _run_in_progress = False
        _run_lock.release()


def _grid(name: str, text: str) -> list[float]:
    try:
        return parse_grid(text)
    except ConfigError as e:
        raise HTTPException(status_code=400, detail=f"{name}: {e}") from None


# ---------------------------------------------------------------------------
# App lifecycle
# ---------------------------------------------------------------------------
@asynccontextmanager
async def lifespan(app: FastAPI):
    """Reset run state on startup."""
    global _last_run_stats
    _last_run_stats = {}
    logger.info("twostar-lab service ready")
    yield


app = FastAPI(
    title="Two-star Correlation Lab",
    lifespan=lifespan,
)


# ---------------------------------------------------------------------------
# Routes
# ---------------------------------------------------------------------------
@app.get("/healthz")
def healthz():
    return {"status": "ok"}


@app.get("/api/fixpoint")
def api_fixpoint(alpha: float = Query(...), h: float = Query(...)):
    """Roots of the mean-field equation and the global maximizers."""
    point = classify(alpha, h)
    return {
        "alpha": alpha,
        "h": h,
        "roots": list(point.roots),
        "maximizers": list(point.maximizers),
        "classification": point.classification,
        "variances": list(point.variances),
    }


@app.get("/api/phase")
def api_phase(
    alpha: str = Query(default="0:4:0.05"),
    h: str = Query(default="-4:1:0.05"),
):
    """Phase diagram as CSV, one row per (alpha, h) cell."""
    alphas, hs = _grid("alpha", alpha), _grid("h", h)
    if len(alphas) * len(hs) > PHASE_CELL_CAP:
        raise HTTPException(status_code=400, detail=f"grid exceeds {PHASE_CELL_CAP} cells")
    report = Report(
        command="phase",
        config={"alpha": alphas, "h": hs},
        records=[p.to_record() for p in phase_grid(alphas, hs)],
        columns=PHASE_COLUMNS,
    )
    return Response(content=emit(report, "csv"), media_type="text/csv")


@app.post("/api/run")
def api_run(body: dict[str, Any] = Body(...)):
    """Run a RunConfig given as JSON and return the report as JSON."""
    try:
        cfg = RunConfig.from_mapping(body)
        report = _execute(cfg)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from None
    return {"meta": plain_meta(report.meta()), "records": report.records}


@app.get("/api/run-status")
def api_run_status():
    """Whether a run is in progress and the stats of the last one."""
    return {
        "in_progress": _run_in_progress,
        "last_run_stats": _last_run_stats,
    }
