"""Session clock: the tick loop, command queue, and event trace.

One Session owns the world, the program, and the executor.  Everything
external (a script, the service, the CLI) talks to it by submitting
commands to a single ordered queue; each tick drains the queue, advances
the executor, publishes a perception snapshot, and, when the robot is idle
and not paused, evaluates the rules and dispatches at most one binding.
Every observable change becomes an event in an append-only trace, so a run
is fully described, replayable, and hashable.
"""

import random
import time
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Deque, Dict, List, Optional, Set, Tuple

from .engine import Binding, detect_conflict, flag_executable
from .executor import Executor
from .program import (ManualTrigger, Program, ProgramError, Rule,
                      describe_rule, save_program)
from .scenario import Scenario
from .script import HumanScript, ScriptView, empty_script
from .trace import ExecutionTrace, TraceEvent
from .world import Rect, World, ZONE_COLORS


@dataclass(frozen=True)
class SessionConfig:
    """Clocking and limits for one session."""

    tick_period_ms: int = 500
    stepped: bool = True
    random_seed: int = 0
    max_ticks: Optional[int] = None
    min_ticks: int = 0
    button_warning_ticks: int = 10

    def __post_init__(self) -> None:
        if self.tick_period_ms <= 0:
            raise ValueError("tick_period_ms must be positive")


@dataclass
class ConflictRecord:
    """An open priority prompt: which sources co-flagged, with what."""

    id: str
    candidates: Tuple[str, ...]
    bindings: Dict[str, Binding]
    raised_tick: int


class Session:
    """A live workspace plus program, advanced one tick at a time."""

    def __init__(self, scenario: Scenario, program: Optional[Program] = None,
                 config: Optional[SessionConfig] = None):
        self.scenario = scenario
        self.config = config or SessionConfig()
        self.program = program if program is not None else Program()
        self.world = scenario.build_world()
        self.executor = Executor(scenario.home)
        self.trace = ExecutionTrace()
        self.queue: Deque[dict] = deque()
        self.tick_no = -1
        self.open_conflict: Optional[ConflictRecord] = None
        self.last_flags: List[Binding] = []
        self.latest_snapshot: Optional[dict] = None
        self.rng = random.Random(self.config.random_seed)
        self._seq = 0
        self._conflict_seq = 0
        self._subscribers: List[Callable[[TraceEvent], None]] = []
        self._button_waits: Dict[str, int] = {}
        self._button_warned: Set[str] = set()

    # -- commands and events ------------------------------------------------

    def submit(self, command: dict) -> None:
        """Queue a command; it is applied at the start of the next tick."""
        self.queue.append(command)

    def subscribe(self, callback: Callable[[TraceEvent], None]) -> None:
        self._subscribers.append(callback)

    def unsubscribe(self, callback: Callable[[TraceEvent], None]) -> None:
        if callback in self._subscribers:
            self._subscribers.remove(callback)

    def _emit(self, kind: str, payload: dict) -> TraceEvent:
        event = TraceEvent(self._seq, max(self.tick_no, 0), kind, payload)
        self._seq += 1
        self.trace.append(event)
        for callback in list(self._subscribers):
            callback(event)
        return event

    # -- the tick -----------------------------------------------------------

    def tick(self, elapsed_ms: Optional[int] = None,
             wall_ms: Optional[float] = None) -> List[TraceEvent]:
        """Advance the session one tick; returns the events it produced.

        In order: apply queued commands, advance the executor, publish the
        perception snapshot, and evaluate the rules if the robot is free.
        """
        self.tick_no += 1
        if elapsed_ms is None:
            elapsed_ms = self.config.tick_period_ms
        first_seq = self._seq

        for _ in range(len(self.queue)):
            self._apply(self.queue.popleft())

        for kind, payload in self.executor.step(
                self.world, self.program.zones, stepped=self.config.stepped,
                elapsed_ms=elapsed_ms, paused=self.program.paused):
            self._emit(kind, payload)

        state = self.world.perceived_view(self.tick_no,
                                          self.program.zones.values())
        snapshot = state.to_payload()
        snapshot["executor"] = self.executor.state_payload()
        snapshot["paused"] = self.program.paused
        snapshot["open_conflict"] = (None if self.open_conflict is None
                                     else self.open_conflict.id)
        if wall_ms is not None:
            snapshot["wall_ms"] = round(wall_ms, 3)
        self.latest_snapshot = snapshot
        self._emit("SnapshotPublished", snapshot)

        self.last_flags = []
        if self.executor.idle and not self.program.paused:
            flags, warnings = flag_executable(self.program, state, True)
            for warning in warnings:
                self._emit("Warning", {"reason": warning})
            self.last_flags = flags
            for flag in flags:
                self._emit("RuleFlagged", {"source_id": flag.source_id,
                                           "source_kind": flag.source_kind,
                                           "binding": flag.to_payload()})
            self._watch_pending_buttons(flags)
            self._dispose(flags)

        return list(self.trace.events[first_seq:])

    def quiescent(self, script_exhausted: bool) -> bool:
        """Nothing left to do: no queued commands, idle robot, no flags, no
        open prompt, and the scripted human is done."""
        return (script_exhausted and self.executor.idle
                and not self.last_flags and self.open_conflict is None
                and not self.queue)

    # -- evaluation ---------------------------------------------------------

    def _dispose(self, flags: List[Binding]) -> None:
        if self.open_conflict is not None:
            flagged = {f.source_id for f in flags}
            if not set(self.open_conflict.candidates) <= flagged:
                self._emit("ConflictCancelled", {
                    "conflict_id": self.open_conflict.id,
                    "reason": "a contender is no longer executable",
                })
                self.open_conflict = None
            else:
                return  # the prompt blocks the dispatch slot
        disposition = detect_conflict(flags, self.program.preferences)
        if disposition.kind == "dispatch":
            self._dispatch(disposition.binding)
        elif disposition.kind == "conflict":
            self._conflict_seq += 1
            record = ConflictRecord(
                f"conflict-{self._conflict_seq}", disposition.candidates,
                {f.source_id: f for f in flags
                 if f.source_id in disposition.candidates},
                self.tick_no)
            self.open_conflict = record
            self._emit("ConflictRaised", {
                "conflict_id": record.id,
                "candidates": list(record.candidates),
                "bindings": {source_id: binding.to_payload()
                             for source_id, binding
                             in record.bindings.items()},
            })

    def _dispatch(self, binding: Binding) -> None:
        if binding.source_kind == "button":
            button = self.program.buttons.get(binding.source_id)
            if button is not None:
                button.pending = False
        for kind, payload in self.executor.begin(binding, self.world,
                                                 self.program.zones):
            self._emit(kind, payload)

    def _watch_pending_buttons(self, flags: List[Binding]) -> None:
        flagged = {f.source_id for f in flags}
        for button in self.program.buttons.values():
            if not button.pending:
                self._button_waits.pop(button.id, None)
                self._button_warned.discard(button.id)
                continue
            if button.id in flagged:
                continue
            waits = self._button_waits.get(button.id, 0) + 1
            self._button_waits[button.id] = waits
            if (waits == self.config.button_warning_ticks
                    and button.id not in self._button_warned):
                self._button_warned.add(button.id)
                self._emit("Warning", {
                    "reason": f"button {button.id!r} has been pending for"
                              f" {waits} ticks without a bindable action"})

    # -- command application ------------------------------------------------

    def _apply(self, command: dict) -> None:
        kind = command.get("kind")
        request_id = command.get("request_id")
        try:
            handler = getattr(self, f"_cmd_{_snake(kind)}", None)
            if handler is None:
                raise ValueError(f"unknown command kind {kind!r}")
            handler(command, request_id)
        except ProgramError as error:
            self._warn(kind, request_id, "; ".join(error.errors))
        except (KeyError, TypeError, ValueError) as error:
            self._warn(kind, request_id, str(error))

    def _warn(self, kind: Optional[str], request_id: Optional[str],
              reason: str) -> None:
        payload = {"command": kind, "reason": reason}
        if request_id is not None:
            payload["request_id"] = request_id
        self._emit("Warning", payload)

    def _ok(self, kind: str, payload: dict,
            request_id: Optional[str]) -> None:
        if request_id is not None:
            payload = {**payload, "request_id": request_id}
        self._emit(kind, payload)

    def _cmd_create_zone(self, command: dict, request_id) -> None:
        doc = command["zone"]
        color = doc.get("color")
        if not color:
            used = {z.color for z in self.program.zones.values()}
            color = next((c for c in ZONE_COLORS if c not in used), None)
            if color is None:
                raise ValueError("no zone colors left")
        zone = self.program.add_zone(Rect.from_payload(doc["rect"]),
                                     str(color), str(doc.get("id", "")),
                                     created_at=max(self.tick_no, 0))
        self._ok("ZoneCreated", {"zone": zone.to_payload()}, request_id)

    def _cmd_update_zone(self, command: dict, request_id) -> None:
        rect = command.get("rect")
        zone = self.program.update_zone(
            command["zone_id"],
            rect=None if rect is None else Rect.from_payload(rect),
            color=command.get("color"))
        self._ok("ZoneUpdated", {"zone": zone.to_payload()}, request_id)

    def _cmd_delete_zone(self, command: dict, request_id) -> None:
        zone_id = command["zone_id"]
        disabled = self.program.delete_zone(zone_id)
        self._ok("ZoneDeleted", {"zone_id": zone_id,
                                 "disabled_rules": disabled}, request_id)

    def _cmd_create_rule(self, command: dict, request_id) -> None:
        rule = Rule.from_payload(command["rule"])
        rule = replace(rule, created_at=max(self.tick_no, 0))
        rule = self.program.add_rule(rule, self.scenario)
        self._ok("RuleCreated", {"rule": rule.to_payload(),
                                 "description": describe_rule(rule)},
                 request_id)

    def _cmd_delete_rule(self, command: dict, request_id) -> None:
        rule_id = command["rule_id"]
        self.program.delete_rule(rule_id)
        self._ok("RuleDeleted", {"rule_id": rule_id}, request_id)

    def _cmd_create_button(self, command: dict, request_id) -> None:
        button = ManualTrigger.from_payload(command["button"])
        button = self.program.add_button(button, self.scenario)
        self._ok("ButtonCreated", {"button": button.to_payload()},
                 request_id)

    def _cmd_press_button(self, command: dict, request_id) -> None:
        button = self.program.press_button(command["button_id"])
        self._button_waits.pop(button.id, None)
        self._button_warned.discard(button.id)
        self._ok("ButtonPressed", {"button_id": button.id}, request_id)

    def _cmd_pause(self, command: dict, request_id) -> None:
        if not self.program.paused:
            self.program.paused = True
            self._ok("Paused", {}, request_id)

    def _cmd_resume(self, command: dict, request_id) -> None:
        if self.program.paused:
            self.program.paused = False
            self._ok("Resumed", {}, request_id)

    def _cmd_resolve_conflict(self, command: dict, request_id) -> None:
        conflict_id = command["conflict_id"]
        chosen = command["chosen_id"]
        remember = bool(command.get("remember", False))
        record = self.open_conflict
        if record is None or record.id != conflict_id:
            raise ValueError(f"no open conflict {conflict_id!r}")
        if chosen not in record.candidates:
            raise ValueError(
                f"{chosen!r} is not a contender in {conflict_id!r}")
        if remember:
            self.program.preferences.remember(record.candidates, chosen)
        self.open_conflict = None
        # re-bind against the world as it is now, not as it was
        state = self.world.perceived_view(self.tick_no,
                                          self.program.zones.values())
        flags, _ = flag_executable(self.program, state, self.executor.idle)
        binding = next((f for f in flags if f.source_id == chosen), None)
        payload = {"conflict_id": conflict_id, "chosen_id": chosen,
                   "remember": remember, "dispatched": binding is not None}
        if binding is None:
            payload["reason"] = "the chosen action is no longer executable"
        self._ok("ConflictResolved", payload, request_id)
        if binding is not None:
            self._dispatch(binding)

    def _cmd_human_op(self, command: dict, request_id) -> None:
        op = command["op"]
        name = op.get("op")
        if name == "relocate":
            obj_id = int(op["object_id"])
            position = _point(op["position"])
            if self.world.effectively_held(obj_id):
                raise ValueError(f"object {obj_id} is held by the robot")
            if self.scenario.on_table(position) is None:
                raise ValueError(f"{list(position)} is not on a table")
            self.world.relocate(obj_id, position)
            self._ok("HumanActionApplied",
                     {"op": "relocate", "object_id": obj_id,
                      "position": [position[0], position[1]]}, request_id)
        elif name == "combine":
            part_id = int(op["part_id"])
            target_id = int(op["target_id"])
            for obj_id in (part_id, target_id):
                if self.world.effectively_held(obj_id):
                    raise ValueError(
                        f"object {obj_id} is held by the robot")
            rule = self.world.combine(part_id, target_id)
            self._ok("HumanActionApplied",
                     {"op": "combine", "part_id": part_id,
                      "target_id": target_id,
                      "target_state": self.world.get(target_id).state,
                      "part_fate": rule.part_fate}, request_id)
        elif name == "remove":
            obj_id = int(op["object_id"])
            if self.world.effectively_held(obj_id):
                raise ValueError(f"object {obj_id} is held by the robot")
            self.world.remove(obj_id)
            self._ok("HumanActionApplied",
                     {"op": "remove", "object_id": obj_id}, request_id)
        elif name == "spawn":
            category = str(op["category"])
            position = _point(op["position"])
            if self.scenario.on_table(position) is None:
                raise ValueError(f"{list(position)} is not on a table")
            obj = self.world.spawn(category, position, op.get("state"))
            self._ok("HumanActionApplied",
                     {"op": "spawn", "object_id": obj.id,
                      "category": category,
                      "position": [position[0], position[1]],
                      "state": obj.state}, request_id)
        else:
            raise ValueError(f"unknown human op {name!r}")

    def _cmd_save_program(self, command: dict, request_id) -> None:
        payload = self.program.to_payload()
        path = command.get("path")
        if path:
            save_program(self.program, path)
        self._ok("ProgramSaved", {"program": payload,
                                  "path": path}, request_id)

    def _cmd_load_program(self, command: dict, request_id) -> None:
        doc = command["program"]
        program = Program.from_payload(doc, self.scenario)
        if self.open_conflict is not None:
            self._emit("ConflictCancelled", {
                "conflict_id": self.open_conflict.id,
                "reason": "program replaced"})
            self.open_conflict = None
        self.program = program
        self._button_waits.clear()
        self._button_warned.clear()
        self._ok("ProgramLoaded", {"zones": len(program.zones),
                                   "rules": len(program.rules),
                                   "buttons": len(program.buttons)},
                 request_id)

    def _cmd_reset_workspace(self, command: dict, request_id) -> None:
        for kind, payload in self.executor.abort_all(self.world,
                                                     "workspace reset"):
            self._emit(kind, payload)
        if self.open_conflict is not None:
            self._emit("ConflictCancelled", {
                "conflict_id": self.open_conflict.id,
                "reason": "workspace reset"})
            self.open_conflict = None
        self.world = self.scenario.build_world()
        for button in self.program.buttons.values():
            button.pending = False
        self._button_waits.clear()
        self._button_warned.clear()
        self._ok("WorkspaceReset", {}, request_id)


def _snake(kind: Optional[str]) -> str:
    if not kind:
        return ""
    out = []
    for i, ch in enumerate(kind):
        if ch.isupper() and i > 0:
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def _point(value: object) -> Tuple[float, float]:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ValueError(f"expected [x, y] pair, got {value!r}")
    return (float(value[0]), float(value[1]))


# ---------------------------------------------------------------------------
# headless runs


@dataclass
class RunResult:
    """A finished headless run."""

    trace: ExecutionTrace
    session: Session
    timed_out: bool

    @property
    def world(self) -> World:
        return self.session.world

    @property
    def ticks(self) -> int:
        return self.session.tick_no + 1


def script_view(session: Session, tick: int) -> ScriptView:
    conflict = session.open_conflict
    return ScriptView(
        tick=tick, world=session.world, zones=session.program.zones,
        conflict_id=None if conflict is None else conflict.id,
        conflict_candidates=() if conflict is None else conflict.candidates,
        executor_idle=session.executor.idle, paused=session.program.paused)


def run_headless(scenario: Scenario, program: Optional[Program] = None,
                 script: Optional[HumanScript] = None,
                 config: Optional[SessionConfig] = None) -> RunResult:
    """Run a session to quiescence (or the tick limit) with a scripted
    human.  Stepped mode runs as fast as the machine allows; real-time mode
    paces ticks on the wall clock and stamps snapshots with it."""
    config = config or SessionConfig()
    session = Session(scenario, program, config)
    script = script if script is not None else empty_script()
    script.reset()
    timed_out = False
    start = time.monotonic()
    previous = start
    while True:
        upcoming = session.tick_no + 1
        for command in script.step_commands(script_view(session, upcoming)):
            session.submit(command)
        if config.stepped:
            session.tick()
        else:
            deadline = start + upcoming * (config.tick_period_ms / 1000.0)
            delay = deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            now = time.monotonic()
            session.tick(elapsed_ms=int(round((now - previous) * 1000.0)),
                         wall_ms=(now - start) * 1000.0)
            previous = now
        if (session.tick_no + 1 >= config.min_ticks
                and session.quiescent(script.exhausted)):
            break
        if (config.max_ticks is not None
                and session.tick_no + 1 >= config.max_ticks):
            timed_out = True
            session._emit("Timeout", {"max_ticks": config.max_ticks})
            break
    return RunResult(session.trace, session, timed_out)
