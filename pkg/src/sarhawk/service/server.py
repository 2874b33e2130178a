"""HTTP + WebSocket transport for live sessions.

Request/response endpoints handle session control; one streaming socket
per client carries the event feed (snapshot first, then every WireEvent
from that point). Payloads use the interchange format throughout; see
docs/protocol.md.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles

from .. import wire
from ..errors import InvalidScenario, SarhawkError, SessionClosed
from ..model import OperatorEvent
from ..sim.scenario import ScenarioConfig
from .session import Session, open_session


class SessionRunner:
    """One live session plus its real-time stepping task and subscribers."""

    def __init__(self, session: Session):
        self.session = session
        self.queues = []
        self.task = None
        session.listeners.append(self._broadcast)

    def _broadcast(self, ev):
        line = wire.dumps(ev)
        for q in list(self.queues):
            q.put_nowait(line)

    def subscribe(self):
        q = asyncio.Queue()
        self.queues.append(q)
        return q

    def unsubscribe(self, q):
        if q in self.queues:
            self.queues.remove(q)

    async def _loop(self):
        dt = self.session.cfg.tick_dt
        try:
            while self.session.running and not self.session.closed:
                if self.session.mission.clock >= self.session.cfg.deadline_s:
                    self.session.close()
                    break
                self.session.step(dt)
                await asyncio.sleep(dt)
        except asyncio.CancelledError:
            pass

    def start(self):
        if self.session.closed:
            raise SessionClosed("cannot start a closed session")
        if not self.session.running:
            self.session.running = True
            self.task = asyncio.get_event_loop().create_task(self._loop())

    def pause(self):
        self.session.running = False
        if self.task is not None:
            self.task.cancel()
            self.task = None

    def close(self):
        self.pause()
        self.session.close()


def create_app(default_cfg: ScenarioConfig = None, static_dir=None) -> FastAPI:
    app = FastAPI(title="sarhawk", version="0.1.0")
    runners = {}

    def runner_of(sid: str) -> SessionRunner:
        r = runners.get(sid)
        if r is None:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return r

    @app.exception_handler(SarhawkError)
    async def _sarhawk_error(_req, exc: SarhawkError):
        status = 409 if isinstance(exc, SessionClosed) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.post("/sessions")
    async def create_session(body: dict = None):
        body = body or {}
        if "scenario" in body and body["scenario"] is not None:
            cfg = ScenarioConfig.from_dict(body["scenario"])
        elif default_cfg is not None:
            cfg = default_cfg
        else:
            cfg = ScenarioConfig()
        session = open_session(cfg, mode="live")
        runners[session.id] = SessionRunner(session)
        return {"session": session.id, "snapshot": session.snapshot()}

    @app.get("/sessions")
    async def list_sessions():
        return {
            "sessions": [
                {"id": sid, "running": r.session.running, "closed": r.session.closed}
                for sid, r in runners.items()
            ]
        }

    @app.get("/sessions/{sid}/snapshot")
    async def snapshot(sid: str):
        return runner_of(sid).session.snapshot()

    @app.post("/sessions/{sid}/events")
    async def submit_event(sid: str, body: dict):
        runner = runner_of(sid)
        try:
            obj = wire.from_wire(body)
        except (ValueError, KeyError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"bad payload: {exc}")
        if isinstance(obj, OperatorEvent):
            ack = runner.session.submit(obj.payload, timestamp=obj.timestamp)
        else:
            ack = runner.session.submit(obj)
        return {"seq": ack.seq, "timestamp": ack.timestamp}

    @app.post("/sessions/{sid}/control")
    async def control(sid: str, body: dict):
        runner = runner_of(sid)
        action = body.get("action")
        if action == "start":
            runner.start()
        elif action == "pause":
            runner.pause()
        elif action == "step":
            ticks = int(body.get("ticks", 1))
            for _ in range(ticks):
                runner.session.step()
        elif action == "close":
            runner.close()
        else:
            raise HTTPException(status_code=400, detail=f"unknown action {action!r}")
        return {"session": sid, "running": runner.session.running, "closed": runner.session.closed}

    @app.get("/sessions/{sid}/log")
    async def get_log(sid: str):
        runner = runner_of(sid)
        return PlainTextResponse(
            "\n".join(wire.dumps(e) for e in runner.session.log), media_type="text/plain"
        )

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        runner = runners.get(sid)
        if runner is None:
            await ws.close(code=4004)
            return
        await ws.accept()
        # snapshot-then-stream: the snapshot's seq marks the hand-off point
        q = runner.subscribe()
        try:
            snap = runner.session.snapshot()
            await ws.send_text(json.dumps(snap, sort_keys=True, separators=(",", ":")))
            while True:
                line = await q.get()
                await ws.send_text(line)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            runner.unsubscribe(q)

    @app.get("/protocol")
    async def protocol():
        doc = Path(__file__).resolve().parents[3] / "docs" / "protocol.md"
        if not doc.exists():
            doc = Path("docs/protocol.md")
        text = doc.read_text() if doc.exists() else "see repository docs/protocol.md"
        return PlainTextResponse(text, media_type="text/markdown")

    if static_dir and Path(static_dir).is_dir():
        app.mount("/cockpit", StaticFiles(directory=static_dir, html=True), name="cockpit")

    return app


def serve(port: int = 8000, host: str = "127.0.0.1", default_cfg: ScenarioConfig = None,
          static_dir=None):
    import uvicorn

    app = create_app(default_cfg=default_cfg, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
