"""HTTP service exposing the simulator.

Endpoints accept a scenario plus run options and return the rendered
artifacts; the CLI is a thin client of these routes.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .scenario import (Detection, run_calibration, run_linearity,
                       run_simulate, dump_spectrum)
from .schema import RunOptions, ScenarioModel
from .synthesis import ConstraintReport

app = FastAPI(title="rtsim", version=__version__,
              description="Closed-loop FMCW radar target simulator with "
                          "two-channel angle-of-arrival synthesis")


class SimulateRequest(BaseModel):
    scenario: ScenarioModel
    options: RunOptions = Field(default_factory=RunOptions)


class DetectionOut(BaseModel):
    target_id: int
    range_m: float | None
    velocity_mps: float | None
    angle_deg: float | None
    range_err_m: float | None
    velocity_err_mps: float | None
    angle_err_deg: float | None
    flagged: bool


class ConstraintOut(BaseModel):
    target_id: int
    same_range_bin: bool
    same_doppler_bin: bool
    spacing_within_resolution: bool
    phase_coherent: bool
    phase_offset_deg: float
    ok: bool


class SimulateResponse(BaseModel):
    detections: list[DetectionOut]
    constraints: list[ConstraintOut]
    flagged: bool
    warnings: list[str]
    files: dict[str, str]


class CalibrateResponse(BaseModel):
    best_offset_s: float
    period_estimate_s: float | None
    min_abs_error_deg: float
    probe_alpha_deg: float
    files: dict[str, str]


class LinearityRow(BaseModel):
    alpha_set_deg: float
    alpha_meas_deg: float
    alpha_err_deg: float
    gain1: float
    gain2: float


class LinearityResponse(BaseModel):
    rows: list[LinearityRow]
    max_abs_error_deg: float
    files: dict[str, str]


def _num(value: float) -> float | None:
    return None if not math.isfinite(value) else value


def _detection_out(d: Detection) -> DetectionOut:
    return DetectionOut(target_id=d.target_id, range_m=_num(d.range_m),
                        velocity_mps=_num(d.velocity_mps),
                        angle_deg=_num(d.angle_deg),
                        range_err_m=_num(d.range_err_m),
                        velocity_err_mps=_num(d.velocity_err_mps),
                        angle_err_deg=_num(d.angle_err_deg), flagged=d.flagged)


def _constraint_out(target_id: int, rep: ConstraintReport) -> ConstraintOut:
    return ConstraintOut(
        target_id=target_id,
        same_range_bin=rep.same_range_bin.ok,
        same_doppler_bin=rep.same_doppler_bin.ok,
        spacing_within_resolution=rep.spacing_within_resolution.ok,
        phase_coherent=rep.phase_coherent.ok,
        phase_offset_deg=math.degrees(rep.phase_coherent.value),
        ok=rep.ok)


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc: ValueError):
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    result = run_simulate(req.scenario, req.options)
    return SimulateResponse(
        detections=[_detection_out(d) for d in result.detections],
        constraints=[_constraint_out(tid, rep)
                     for tid, rep in result.constraints],
        flagged=result.flagged, warnings=result.warnings, files=result.files)


@app.post("/calibrate", response_model=CalibrateResponse)
def calibrate(req: SimulateRequest) -> CalibrateResponse:
    result = run_calibration(req.scenario, req.options)
    return CalibrateResponse(best_offset_s=result.best_offset_s,
                             period_estimate_s=result.period_estimate_s,
                             min_abs_error_deg=result.min_abs_error_deg,
                             probe_alpha_deg=result.probe_alpha_deg,
                             files=result.files)


@app.post("/linearity", response_model=LinearityResponse)
def linearity(req: SimulateRequest) -> LinearityResponse:
    result = run_linearity(req.scenario, req.options)
    rows = [LinearityRow(alpha_set_deg=r[0], alpha_meas_deg=r[1],
                         alpha_err_deg=r[2], gain1=r[3], gain2=r[4])
            for r in result.rows]
    return LinearityResponse(rows=rows,
                             max_abs_error_deg=result.max_abs_error_deg,
                             files=result.files)


@app.post("/dump-spectrum")
def dump_spectrum_route(req: SimulateRequest) -> Response:
    blob = dump_spectrum(req.scenario, req.options)
    return Response(content=blob, media_type="application/octet-stream")
