"""FastAPI service wrapping the simulator.

Each request builds a fresh engine, so the service is stateless and safe
for concurrent clients. Credential persistence is isolated to a
per-request temporary directory; clients cannot point the store at a
server-side path.

Run with: ``uvicorn saferoom.service:app``
"""

from __future__ import annotations

import os
import tempfile

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import DEFAULTS, build_config
from .errors import ConfigError, ParseError, StoreError
from .runner import Report, audit_lines, run_scenario
from .scenario import parse_scenario

app = FastAPI(
    title="saferoom",
    version=__version__,
    description="Deterministic simulation of a layered room-security system.",
)


class SimulateRequest(BaseModel):
    scenario: str = Field(description="scenario script text")
    config: dict[str, str] = Field(
        default_factory=dict, description="config overrides, same keys as the config file"
    )
    include_events: bool = True
    include_audit: bool = False


class EventOut(BaseModel):
    at: int
    source: str
    kind: str
    detail: str


class SimulateResponse(BaseModel):
    scenario: str
    end_ms: int
    config_digest: str
    alarm_latched: bool
    summary: dict[str, int]
    events: list[EventOut] = []
    audit: list[str] = []


class ScenarioCheckRequest(BaseModel):
    scenario: str


class ScenarioCheckResponse(BaseModel):
    name: str
    end_ms: int
    stimulus_count: int


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok", "version": __version__}


@app.get("/config/defaults")
def config_defaults() -> dict[str, str]:
    return dict(DEFAULTS)


@app.post("/scenario/check", response_model=ScenarioCheckResponse)
def scenario_check(request: ScenarioCheckRequest) -> ScenarioCheckResponse:
    scenario = _parse(request.scenario)
    return ScenarioCheckResponse(
        name=scenario.name,
        end_ms=scenario.end_ms,
        stimulus_count=len(scenario.stimuli),
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest) -> SimulateResponse:
    if "credential_store_path" in request.config:
        raise HTTPException(
            status_code=422,
            detail={
                "code": "CONFIG_INVALID",
                "reason": "credential_store_path is managed by the service",
            },
        )
    scenario = _parse(request.scenario)
    with tempfile.TemporaryDirectory(prefix="saferoom-") as tmp:
        overrides = dict(request.config)
        overrides["credential_store_path"] = os.path.join(tmp, "credentials.store")
        try:
            cfg = build_config(overrides)
        except ConfigError as exc:
            raise HTTPException(
                status_code=422, detail={"code": exc.code, "reason": str(exc)}
            ) from exc
        try:
            report = run_scenario(scenario, cfg)
        except StoreError as exc:
            raise HTTPException(
                status_code=500, detail={"code": exc.code, "reason": str(exc)}
            ) from exc
    return _response(scenario.end_ms, report, request)


def _parse(text: str):
    try:
        return parse_scenario(text)
    except ParseError as exc:
        raise HTTPException(
            status_code=422,
            detail={"code": exc.code, "line": exc.line, "reason": exc.reason},
        ) from exc


def _response(end_ms: int, report: Report, request: SimulateRequest) -> SimulateResponse:
    return SimulateResponse(
        scenario=report.scenario,
        end_ms=end_ms,
        config_digest=report.config_digest,
        alarm_latched=report.alarm_latched,
        summary=report.summary,
        events=[
            EventOut(at=e.at, source=e.source, kind=e.kind, detail=e.detail)
            for e in report.events
        ]
        if request.include_events
        else [],
        audit=audit_lines(report) if request.include_audit else [],
    )
