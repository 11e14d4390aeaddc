"""Scripted human collaborator for headless runs.

A script is an ordered list of steps.  Each step waits for its trigger (a
tick number, a world predicate, or both), then performs one operation:
move, combine, remove, or spawn an object, press a button, resolve an open
priority prompt, pause or resume, or edit the program.  A step may fire
more than once (`repeat`), with an optional cooldown in ticks between
firings (`delay`).

The scripted human acts like a person: one operation per tick, taken from
the first step in order that is ready.  Steps look at the ground-truth
world, not the robot's filtered view, so they can reach for objects the
robot cannot detect.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import yaml

from .world import World, Zone


class ScriptError(ValueError):
    """Raised with every problem found in a script document."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# ---------------------------------------------------------------------------
# what a step can see


@dataclass(frozen=True)
class ScriptView:
    """Everything a script step may inspect when deciding to fire."""

    tick: int
    world: World
    zones: Dict[str, Zone]
    conflict_id: Optional[str] = None
    conflict_candidates: Tuple[str, ...] = ()
    executor_idle: bool = True
    paused: bool = False


@dataclass(frozen=True)
class Selector:
    """Picks one object: nth (by ascending id) among the free, top-level
    objects of a category, optionally narrowed by zone and state."""

    category: str
    in_zone: Optional[str] = None
    state: Optional[str] = None
    nth: int = 0

    def matches(self, view: ScriptView) -> List[int]:
        world = view.world
        found = []
        for obj in sorted(world.objects.values(), key=lambda o: o.id):
            if obj.category != self.category:
                continue
            if obj.contained_in is not None or world.effectively_held(obj.id):
                continue
            if self.state is not None and obj.state != self.state:
                continue
            if self.in_zone is not None:
                zone = view.zones.get(self.in_zone)
                if zone is None or not zone.rect.contains(
                        world.effective_position(obj.id)):
                    continue
            found.append(obj.id)
        return found

    def resolve(self, view: ScriptView) -> Optional[int]:
        found = self.matches(view)
        return found[self.nth] if self.nth < len(found) else None


# ---------------------------------------------------------------------------
# steps


@dataclass
class ScriptStep:
    """One unit of scripted human behaviour."""

    op: str
    params: Dict[str, object]
    at_tick: Optional[int] = None
    exists: Optional[Selector] = None
    min_count: int = 1
    conflict_open: bool = False
    repeat: int = 1
    delay: int = 0
    fired: int = 0
    last_fired: Optional[int] = None

    @property
    def exhausted(self) -> bool:
        return self.fired >= self.repeat

    def trigger_satisfied(self, view: ScriptView) -> bool:
        if self.at_tick is not None and view.tick < self.at_tick:
            return False
        if self.last_fired is not None \
                and view.tick - self.last_fired < max(self.delay, 1):
            return False
        if self.conflict_open and view.conflict_id is None:
            return False
        if self.exists is not None \
                and len(self.exists.matches(view)) < self.min_count:
            return False
        return True

    def build_command(self, view: ScriptView) -> Optional[dict]:
        """The command this step would submit right now, or None when a
        needed object or conflict candidate is not available yet."""
        p = self.params
        if self.op == "relocate":
            obj_id = p["object"].resolve(view)
            if obj_id is None:
                return None
            return {"kind": "HumanOp", "op": {
                "op": "relocate", "object_id": obj_id,
                "position": list(p["position"])}}
        if self.op == "combine":
            part_id = p["part"].resolve(view)
            target_id = p["target"].resolve(view)
            if part_id is None or target_id is None or part_id == target_id:
                return None
            return {"kind": "HumanOp", "op": {
                "op": "combine", "part_id": part_id, "target_id": target_id}}
        if self.op == "remove":
            obj_id = p["object"].resolve(view)
            if obj_id is None:
                return None
            return {"kind": "HumanOp", "op": {"op": "remove",
                                              "object_id": obj_id}}
        if self.op == "spawn":
            op = {"op": "spawn", "category": p["category"],
                  "position": list(p["position"])}
            if p.get("state") is not None:
                op["state"] = p["state"]
            return {"kind": "HumanOp", "op": op}
        if self.op == "press_button":
            return {"kind": "PressButton", "button_id": p["button"]}
        if self.op == "resolve_conflict":
            if view.conflict_id is None \
                    or p["choose"] not in view.conflict_candidates:
                return None
            return {"kind": "ResolveConflict", "conflict_id": view.conflict_id,
                    "chosen_id": p["choose"], "remember": p["remember"]}
        if self.op == "pause":
            return {"kind": "Pause"}
        if self.op == "resume":
            return {"kind": "Resume"}
        if self.op == "create_rule":
            return {"kind": "CreateRule", "rule": p["rule"]}
        if self.op == "delete_rule":
            return {"kind": "DeleteRule", "rule_id": p["rule_id"]}
        if self.op == "create_zone":
            return {"kind": "CreateZone", "zone": p["zone"]}
        if self.op == "update_zone":
            command = {"kind": "UpdateZone", "zone_id": p["zone_id"]}
            for key in ("rect", "color"):
                if p.get(key) is not None:
                    command[key] = p[key]
            return command
        if self.op == "delete_zone":
            return {"kind": "DeleteZone", "zone_id": p["zone_id"]}
        if self.op == "create_button":
            return {"kind": "CreateButton", "button": p["button"]}
        raise AssertionError(f"unhandled op {self.op!r}")


@dataclass
class HumanScript:
    """The parsed script plus its firing state."""

    name: str = ""
    steps: List[ScriptStep] = field(default_factory=list)

    @property
    def exhausted(self) -> bool:
        return all(step.exhausted for step in self.steps)

    def reset(self) -> None:
        for step in self.steps:
            step.fired = 0
            step.last_fired = None

    def step_commands(self, view: ScriptView) -> List[dict]:
        """At most one command per tick: the first ready step fires."""
        for step in self.steps:
            if step.exhausted or not step.trigger_satisfied(view):
                continue
            command = step.build_command(view)
            if command is None:
                continue
            step.fired += 1
            step.last_fired = view.tick
            return [command]
        return []


def empty_script() -> HumanScript:
    return HumanScript(name="empty")


# ---------------------------------------------------------------------------
# parsing


_SELECTOR_KEYS = {"category", "in_zone", "state", "nth"}
_OP_PARAMS = {
    "relocate": {"object": "selector", "position": "point"},
    "combine": {"part": "selector", "target": "selector"},
    "remove": {"object": "selector"},
    "spawn": {"category": "str", "position": "point", "state": "str?"},
    "press_button": {"button": "str"},
    "resolve_conflict": {"choose": "str", "remember": "bool"},
    "pause": {},
    "resume": {},
    "create_rule": {"rule": "dict"},
    "delete_rule": {"rule_id": "str"},
    "create_zone": {"zone": "dict"},
    "update_zone": {"zone_id": "str", "rect": "list?", "color": "str?"},
    "delete_zone": {"zone_id": "str"},
    "create_button": {"button": "dict"},
}


def _parse_selector(data: object, where: str,
                    errors: List[str]) -> Optional[Selector]:
    if not isinstance(data, dict) or "category" not in data:
        errors.append(f"{where}: a selector needs at least a category")
        return None
    unknown = set(data) - _SELECTOR_KEYS
    if unknown:
        errors.append(f"{where}: unknown selector keys {sorted(unknown)}")
        return None
    nth = data.get("nth", 0)
    if not isinstance(nth, int) or nth < 0:
        errors.append(f"{where}: nth must be a non-negative integer")
        return None
    return Selector(str(data["category"]),
                    in_zone=data.get("in_zone"),
                    state=data.get("state"), nth=nth)


def _parse_point(data: object, where: str,
                 errors: List[str]) -> Optional[Tuple[float, float]]:
    if (not isinstance(data, (list, tuple)) or len(data) != 2
            or not all(isinstance(v, (int, float)) for v in data)):
        errors.append(f"{where}: a position is a pair of numbers")
        return None
    return (float(data[0]), float(data[1]))


def _parse_do(data: object, where: str,
              errors: List[str]) -> Optional[Tuple[str, Dict[str, object]]]:
    if not isinstance(data, dict) or "op" not in data:
        errors.append(f"{where}: 'do' needs an 'op'")
        return None
    op = str(data["op"])
    if op not in _OP_PARAMS:
        errors.append(f"{where}: unknown op {op!r}"
                      f" (known: {', '.join(sorted(_OP_PARAMS))})")
        return None
    spec = _OP_PARAMS[op]
    params: Dict[str, object] = {}
    for key, shape in spec.items():
        optional = shape.endswith("?")
        value = data.get(key)
        if value is None:
            if not optional:
                errors.append(f"{where}: op {op!r} needs {key!r}")
            else:
                params[key] = None
            continue
        if shape == "selector":
            params[key] = _parse_selector(value, f"{where}.{key}", errors)
        elif shape == "point":
            params[key] = _parse_point(value, f"{where}.{key}", errors)
        elif shape == "bool":
            params[key] = bool(value)
        elif shape.startswith("dict"):
            if not isinstance(value, dict):
                errors.append(f"{where}: {key!r} must be a mapping")
            params[key] = value
        else:
            params[key] = value
    unknown = set(data) - set(spec) - {"op"}
    if unknown:
        errors.append(f"{where}: op {op!r} does not take {sorted(unknown)}")
    if any(v is None for k, v in params.items()
           if not spec[k].endswith("?")):
        return None
    return op, params


def parse_script(doc: object) -> HumanScript:
    """Build a script from a parsed document, collecting every problem."""
    errors: List[str] = []
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ScriptError(["a script document must be a mapping"])
    steps: List[ScriptStep] = []
    entries = doc.get("steps", [])
    if entries is None:
        entries = []
    if not isinstance(entries, list):
        raise ScriptError(["'steps' must be a list"])
    for i, entry in enumerate(entries):
        where = f"steps[{i}]"
        if not isinstance(entry, dict):
            errors.append(f"{where}: each step is a mapping")
            continue
        unknown = set(entry) - {"at_tick", "when", "repeat", "delay", "do"}
        if unknown:
            errors.append(f"{where}: unknown keys {sorted(unknown)}")
        at_tick = entry.get("at_tick")
        if at_tick is not None and (not isinstance(at_tick, int)
                                    or at_tick < 0):
            errors.append(f"{where}: at_tick must be a non-negative integer")
            at_tick = None
        exists = None
        min_count = 1
        conflict_open = False
        when = entry.get("when")
        if when is not None:
            if not isinstance(when, dict):
                errors.append(f"{where}: 'when' must be a mapping")
            elif "exists" in when:
                exists = _parse_selector(when["exists"], f"{where}.when",
                                         errors)
                min_count = when.get("min_count", 1)
                if not isinstance(min_count, int) or min_count < 1:
                    errors.append(f"{where}: min_count must be >= 1")
                    min_count = 1
            elif when.get("conflict_open") is True:
                conflict_open = True
            else:
                errors.append(f"{where}: 'when' must be"
                              " {exists: selector} or {conflict_open: true}")
        repeat = entry.get("repeat", 1)
        if not isinstance(repeat, int) or repeat < 1:
            errors.append(f"{where}: repeat must be >= 1")
            repeat = 1
        delay = entry.get("delay", 0)
        if not isinstance(delay, int) or delay < 0:
            errors.append(f"{where}: delay must be >= 0")
            delay = 0
        parsed = _parse_do(entry.get("do"), where, errors)
        if parsed is None:
            continue
        op, params = parsed
        steps.append(ScriptStep(op, params, at_tick=at_tick, exists=exists,
                                min_count=min_count,
                                conflict_open=conflict_open,
                                repeat=repeat, delay=delay))
    if errors:
        raise ScriptError(errors)
    return HumanScript(name=str(doc.get("name", "")), steps=steps)


def load_script(path: str) -> HumanScript:
    with open(path, "r", encoding="utf-8") as handle:
        doc = yaml.safe_load(handle)
    return parse_script(doc)
