"""HTTP control plane for live runs.

Thin wrapper over the engine: sessions are engines plus a lock, and every
endpoint either calls an engine method or reads its buffers. The service
never computes simulation quantities itself, so a service-driven run writes
artifacts byte-identical to a CLI run of the same seed and config.
"""

from __future__ import annotations

import tempfile
import threading
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .audit import round_floats
from .config import Window, load_scenario, validate_window
from .engine import Engine
from .errors import ConfigError, ConsistencyError


class CreateSession(BaseModel):
    scenario: Optional[str] = None
    seed: Optional[int] = None
    overrides: dict[str, Any] = Field(default_factory=dict)


class AdvanceRequest(BaseModel):
    steps: int = Field(default=1, ge=0)


class InjectRequest(BaseModel):
    path: str
    value: Any
    duration: Optional[int] = Field(default=None, ge=1)


class Session:
    def __init__(self, session_id: str, engine: Engine,
                 forked_from: Optional[str] = None):
        self.id = session_id
        self.engine = engine
        self.lock = threading.Lock()
        self.forked_from = forked_from


def _resolve_scenario(name: Optional[str], scenario_dir: Path) -> Optional[Path]:
    if name is None:
        return None
    direct = Path(name)
    if direct.exists():
        return direct
    for candidate in (scenario_dir / name, scenario_dir / f"{name}.yaml"):
        if candidate.exists():
            return candidate
    raise ConfigError(f"scenario not found: {name} (searched {scenario_dir})")


def create_app(scenario_dir: Optional[str | Path] = None,
               sessions_root: Optional[str | Path] = None) -> FastAPI:
    app = FastAPI(title="publoop control service")
    # the web client is served separately during development
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    scenarios = Path(scenario_dir) if scenario_dir else Path("configs/scenarios")
    root = Path(sessions_root) if sessions_root else Path(
        tempfile.mkdtemp(prefix="publoop-sessions-"))
    root.mkdir(parents=True, exist_ok=True)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    counter = {"n": 0}

    def new_id() -> str:
        counter["n"] += 1
        return f"s{counter['n']:04d}"

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404,
                                detail=f"unknown session {session_id}")
        return session

    def session_view(session: Session) -> dict:
        e = session.engine
        view = {
            "session_id": session.id,
            "t": e.t,
            "horizon": e.scenario.horizon,
            "finished": e.finished,
            "status": "finished" if e.finished else "paused",
            "config_hash": e.scenario.config_hash(),
            "run_dir": str(e.run_dir),
            "config": e.scenario.resolved_dict(),
        }
        if session.forked_from:
            view["forked_from"] = session.forked_from
        return view

    @app.post("/sessions")
    def create_session(body: CreateSession) -> dict:
        pairs = [(k, v) for k, v in body.overrides.items()]
        if body.seed is not None:
            pairs.append(("seed", str(body.seed)))
        try:
            path = _resolve_scenario(body.scenario, scenarios)
            cfg = load_scenario(path, pairs)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with registry_lock:
            session_id = new_id()
            engine = Engine(cfg, root / session_id)
            sessions[session_id] = Session(session_id, engine)
        return session_view(sessions[session_id])

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str, body: AdvanceRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            e = session.engine
            if e.finished and body.steps > 0:
                raise HTTPException(status_code=409,
                                    detail="session already at horizon")
            try:
                snapshots = e.advance(body.steps)
                if e.finished:
                    e.finalize()
            except ConsistencyError as exc:
                raise HTTPException(status_code=500, detail=str(exc))
            return {
                "session_id": session.id,
                "t": e.t,
                "finished": e.finished,
                "snapshots": [round_floats(asdict(s)) for s in snapshots],
                "policy": {
                    "tau": e.policy.tau,
                    "rho_ai": e.policy.rho_ai,
                    "escalation_enabled": e.policy.escalation_enabled,
                },
            }

    @app.post("/sessions/{session_id}/inject")
    def inject(session_id: str, body: InjectRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            e = session.engine
            if e.finished:
                raise HTTPException(status_code=409,
                                    detail="cannot steer a finished session")
            horizon = e.scenario.horizon
            end = horizon if body.duration is None else min(
                horizon, e.t + body.duration)
            window = Window(start=e.t, end=end, path=body.path, value=body.value)
            try:
                validate_window(window, horizon)
            except ConfigError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            e.scenario.windows.append(window)
            event = e.audit.append(e.t, "run_meta", {
                "injected": {"start": window.start, "end": window.end,
                             "path": window.path, "value": window.value},
            })
            e.audit.flush()
            return {"session_id": session.id, "t": e.t,
                    "window": {"start": window.start, "end": window.end,
                               "path": window.path, "value": window.value},
                    "event_seq": event["seq"]}

    @app.post("/sessions/{session_id}/fork")
    def fork(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            with registry_lock:
                new_session_id = new_id()
                clone = session.engine.fork(root / new_session_id)
                sessions[new_session_id] = Session(
                    new_session_id, clone, forked_from=session.id)
        return session_view(sessions[new_session_id])

    @app.get("/sessions/{session_id}/metrics")
    def metrics(session_id: str, since_t: int = 0) -> dict:
        session = get_session(session_id)
        with session.lock:
            rows = [round_floats(row) for row in session.engine.metrics.rows
                    if row["t"] >= since_t]
        return {"session_id": session.id, "rows": rows}

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, since_seq: int = 0) -> dict:
        session = get_session(session_id)
        with session.lock:
            out = [e for e in session.engine.audit.events
                   if e["seq"] >= since_seq]
        return {"session_id": session.id, "events": out}

    @app.get("/sessions/{session_id}/summary")
    def summary(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return round_floats(session.engine.summary_dict())

    @app.get("/sessions")
    def list_sessions() -> dict:
        with registry_lock:
            return {"sessions": [session_view(s) for s in sessions.values()]}

    return app
