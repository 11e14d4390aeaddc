"""Web service around live sessions.

REST endpoints create and inspect sessions; a per-session WebSocket streams
snapshots and events and accepts authoring commands.  Commands are queued
to the tick loop and acknowledged immediately; semantic failures come back
later as Error frames carrying the client's request id.  A session ticks
itself in real time by default, or is advanced manually through the tick
endpoint (how the tests drive it).
"""

import asyncio
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Dict, List, Optional

from fastapi import Body, FastAPI, HTTPException, WebSocket
from fastapi.websockets import WebSocketDisconnect

from . import __version__
from .program import describe_action, describe_condition, describe_rule
from .runtime import Session, SessionConfig
from .scenario import (ScenarioError, list_fixtures, load_scenario,
                       resolve_fixture)
from .trace import TraceEvent

CLIENT_KINDS = {
    "CreateZone": ("zone",),
    "UpdateZone": ("zone_id",),
    "DeleteZone": ("zone_id",),
    "CreateRule": ("rule",),
    "DeleteRule": ("rule_id",),
    "CreateButton": ("button",),
    "PressButton": ("button_id",),
    "Pause": (),
    "Resume": (),
    "ResolveConflict": ("conflict_id", "chosen_id"),
    "HumanOp": ("op",),
    "SaveProgram": (),
    "LoadProgram": ("program",),
    "ResetWorkspace": (),
}


@dataclass(frozen=True)
class ServiceConfig:
    """Service-wide defaults; sessions may override the clock per create."""

    tick_period_ms: int = 500
    stepped: bool = False
    auto_tick: bool = True
    preload_scenario: Optional[str] = None
    ui_dir: Optional[str] = None


class ServiceSession:
    """One live session plus its clock thread and frame translation."""

    def __init__(self, session_id: str, session: Session, auto_tick: bool):
        self.id = session_id
        self.session = session
        self.auto_tick = auto_tick
        self.lock = threading.Lock()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        if auto_tick:
            self._thread = threading.Thread(target=self._run, daemon=True,
                                            name=f"tick-{session_id}")
            self._thread.start()
        else:
            self.tick(1)

    # -- clock --------------------------------------------------------------

    def _run(self) -> None:
        period = self.session.config.tick_period_ms / 1000.0
        start = time.monotonic()
        previous = start
        while not self._stop.is_set():
            now = time.monotonic()
            with self.lock:
                self.session.tick(
                    elapsed_ms=int(round((now - previous) * 1000.0)),
                    wall_ms=(now - start) * 1000.0)
            previous = now
            upcoming = self.session.tick_no + 1
            self._stop.wait(max(0.0, start + upcoming * period
                                - time.monotonic()))

    def tick(self, count: int) -> int:
        for _ in range(count):
            with self.lock:
                self.session.tick()
        return self.session.tick_no

    def close(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    # -- frame translation --------------------------------------------------

    def frame_for(self, event: TraceEvent) -> dict:
        if event.kind == "SnapshotPublished":
            return {"kind": "Snapshot", "seq": event.seq,
                    "tick": event.tick, "snapshot": event.payload}
        if event.kind == "ConflictRaised":
            return self._conflict_prompt(event)
        if event.kind == "Warning" and "request_id" in event.payload:
            return {"kind": "Error", "seq": event.seq,
                    "request_id": event.payload["request_id"],
                    "reason": event.payload.get("reason", "")}
        return {"kind": "Event", "seq": event.seq, "event": {
            "seq": event.seq, "tick": event.tick, "kind": event.kind,
            "payload": event.payload}}

    def _conflict_prompt(self, event: TraceEvent) -> dict:
        program = self.session.program
        bindings = event.payload.get("bindings", {})
        candidates = []
        for source_id in event.payload["candidates"]:
            rule = program.rules.get(source_id)
            button = program.buttons.get(source_id)
            if rule is not None:
                entry = {
                    "id": source_id,
                    "description": describe_rule(rule),
                    "conditions": [describe_condition(c)
                                   for c in rule.conditions],
                    "actions": [describe_action(a) for a in rule.actions],
                }
            elif button is not None:
                entry = {
                    "id": source_id,
                    "description": f"button {button.label}",
                    "conditions": [],
                    "actions": [describe_action(a)
                                for a in button.actions],
                }
            else:
                entry = {"id": source_id, "description": source_id,
                         "conditions": [], "actions": []}
            entry["binding"] = bindings.get(source_id)
            candidates.append(entry)
        return {"kind": "ConflictPrompt", "seq": event.seq,
                "tick": event.tick,
                "conflict_id": event.payload["conflict_id"],
                "candidates": candidates}

    def catalog(self) -> dict:
        """Dropdown choices from the latest snapshot: only what the robot
        can currently see is offered."""
        snapshot = self.session.latest_snapshot or {"objects": [],
                                                    "zones": []}
        present: List[str] = []
        for entry in snapshot["objects"]:
            if entry["category"] not in present:
                present.append(entry["category"])
        specs = {c.name: c for c in self.session.scenario.categories}
        return {
            "categories": present,
            "zones": [z["id"] for z in snapshot["zones"]],
            "states": {name: list(specs[name].states)
                       for name in present if specs[name].states},
            "containers": [name for name in present
                           if specs[name].is_container],
        }


def validate_frame(frame: object) -> Optional[str]:
    """Edge validation only: shape, kind, and request id.  Semantic checks
    happen on the tick thread."""
    if not isinstance(frame, dict):
        return "a frame must be an object"
    kind = frame.get("kind")
    if kind not in CLIENT_KINDS:
        return f"unknown kind {kind!r}"
    if not isinstance(frame.get("request_id"), str) \
            or not frame["request_id"]:
        return "a frame needs a request_id string"
    missing = [key for key in CLIENT_KINDS[kind] if key not in frame]
    if missing:
        return f"{kind} frame is missing {missing}"
    return None


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    sessions: Dict[str, ServiceSession] = {}
    counter = {"next": 0}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for service_session in sessions.values():
            service_session.close()

    app = FastAPI(title="workcell service", version=__version__,
                  lifespan=lifespan)

    def get_session(session_id: str) -> ServiceSession:
        service_session = sessions.get(session_id)
        if service_session is None:
            raise HTTPException(404, f"no session {session_id!r}")
        return service_session

    @app.get("/")
    def index() -> dict:
        return {"service": "workcell", "version": __version__,
                "scenarios": list_fixtures("scenarios")}

    @app.post("/sessions", status_code=201)
    def open_session(body: dict = Body(...)) -> dict:
        name = body.get("scenario")
        if not name:
            raise HTTPException(400, "body needs a scenario name")
        try:
            scenario = load_scenario(resolve_fixture("scenarios",
                                                     str(name)))
        except (ScenarioError, FileNotFoundError) as error:
            raise HTTPException(404, str(error))
        try:
            session_config = SessionConfig(
                tick_period_ms=int(body.get("tick_ms",
                                            config.tick_period_ms)),
                stepped=bool(body.get("stepped", config.stepped)))
        except ValueError as error:
            raise HTTPException(400, str(error))
        counter["next"] += 1
        session_id = f"session-{counter['next']}"
        service_session = ServiceSession(
            session_id, Session(scenario, config=session_config),
            auto_tick=config.auto_tick)
        sessions[session_id] = service_session
        return {"session_id": session_id,
                "scenario": scenario.to_payload(),
                "tick_period_ms": session_config.tick_period_ms}

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": [
            {"session_id": s.id, "scenario": s.session.scenario.id,
             "tick": s.session.tick_no} for s in sessions.values()]}

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        service_session = get_session(session_id)
        service_session.close()
        del sessions[session_id]
        return {"closed": session_id}

    @app.get("/sessions/{session_id}/snapshot")
    def snapshot(session_id: str) -> dict:
        return {"snapshot": get_session(session_id).session.latest_snapshot}

    @app.get("/sessions/{session_id}/program")
    def program(session_id: str) -> dict:
        return {"program": get_session(session_id).session.program.to_payload()}

    @app.get("/sessions/{session_id}/catalog")
    def catalog(session_id: str) -> dict:
        return get_session(session_id).catalog()

    @app.get("/sessions/{session_id}/truth")
    def truth(session_id: str) -> dict:
        """Ground-truth object list, undetectable categories included.
        The UI offers this as an overlay; the robot never sees it."""
        service_session = get_session(session_id)
        session = service_session.session
        with service_session.lock:
            objects = []
            for obj in sorted(session.world.objects.values(),
                              key=lambda o: o.id):
                spec = session.world.category(obj.category)
                position = session.world.effective_position(obj.id)
                objects.append({
                    "id": obj.id, "category": obj.category,
                    "position": [round(position[0], 6),
                                 round(position[1], 6)],
                    "state": obj.state,
                    "contained_in": obj.contained_in,
                    "held": obj.held,
                    "detectable": bool(spec and spec.detectable),
                })
        return {"tick": session.tick_no, "objects": objects}

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, since: int = 0) -> dict:
        trace = get_session(session_id).session.trace
        return {"events": [
            {"seq": e.seq, "tick": e.tick, "kind": e.kind,
             "payload": e.payload}
            for e in trace.events if e.seq >= since]}

    @app.post("/sessions/{session_id}/tick")
    def tick(session_id: str, body: dict = Body(default={})) -> dict:
        service_session = get_session(session_id)
        if service_session.auto_tick:
            raise HTTPException(409, "session ticks itself")
        count = int(body.get("count", 1))
        if count < 1:
            raise HTTPException(400, "count must be >= 1")
        return {"tick": service_session.tick(count)}

    if config.preload_scenario:
        open_session({"scenario": config.preload_scenario})

    @app.websocket("/sessions/{session_id}/ws")
    async def channel(websocket: WebSocket, session_id: str) -> None:
        service_session = sessions.get(session_id)
        if service_session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        loop = asyncio.get_running_loop()
        outbox: asyncio.Queue = asyncio.Queue()

        def forward(event: TraceEvent) -> None:
            frame = service_session.frame_for(event)
            loop.call_soon_threadsafe(outbox.put_nowait, frame)

        session = service_session.session
        session.subscribe(forward)
        await websocket.send_json({
            "kind": "Hello", "version": __version__,
            "session_id": session_id,
            "scenario": session.scenario.to_payload(),
            "tick": session.tick_no,
        })
        if session.latest_snapshot is not None:
            await websocket.send_json({
                "kind": "Snapshot", "seq": -1, "tick": session.tick_no,
                "snapshot": session.latest_snapshot})

        async def sender() -> None:
            while True:
                await websocket.send_json(await outbox.get())

        pump = asyncio.create_task(sender())
        try:
            while True:
                frame = await websocket.receive_json()
                problem = validate_frame(frame)
                if problem is not None:
                    await websocket.send_json({
                        "kind": "Error", "reason": problem,
                        "request_id": (frame or {}).get("request_id")
                        if isinstance(frame, dict) else None})
                    continue
                session.submit(dict(frame))
                await websocket.send_json({"kind": "Ack",
                                           "request_id":
                                           frame["request_id"]})
        except WebSocketDisconnect:
            pass
        finally:
            pump.cancel()
            session.unsubscribe(forward)

    if config.ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True),
                  name="ui")

    return app
