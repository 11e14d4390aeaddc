"""Pick-and-place execution for bound move actions.

Every move action expands into the same ten-primitive plan: approach the
object, descend, close the gripper, ascend, transit, approach the target,
descend, open the gripper, ascend, and return home.  The world only changes
when a gripper toggle finishes: closing picks the object up, opening puts it
down or places it inside its container.  Bindings are re-validated when each
action starts, and a grasp that no longer matches the planned point aborts
the action together with the rest of its rule.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .engine import ActionBinding, Binding
from .program import (GridPlacement, InsidePlacement, MiddlePlacement,
                      MoveAction)
from .world import Point, World, Zone

MOVE_MS = 400
TOGGLE_MS = 200

Event = Tuple[str, dict]


class PlanError(Exception):
    """A bound action can no longer be planned against the current world."""


@dataclass(frozen=True)
class Primitive:
    """One robot-level step of a move action."""

    kind: str                      # "move_to" or "toggle_gripper"
    label: str                     # e.g. "descend_source", "open_gripper"
    target: Point                  # where the arm is after this step
    duration_ms: int
    phase: Optional[str] = None    # "close" or "open" for gripper toggles

    def to_payload(self) -> dict:
        payload = {
            "kind": self.kind,
            "label": self.label,
            "target": [round(self.target[0], 6), round(self.target[1], 6)],
            "duration_ms": self.duration_ms,
        }
        if self.phase is not None:
            payload["phase"] = self.phase
        return payload


# ---------------------------------------------------------------------------
# planning


def resolve_binding(action: MoveAction, binding: ActionBinding, world: World,
                    zones: Dict[str, Zone]) -> ActionBinding:
    """Check a binding against the current world and pin down the target.

    The bound object must still exist, be free, and sit in the source zone.
    Placement targets are recomputed from the live world: the middle point
    from the current zone rectangle, a grid cell from current occupancy, and
    a container by lowest id among the instances now in the target zone
    (keeping the bound one when it is still valid).  Raises PlanError when
    any of that fails.
    """
    obj = world.objects.get(binding.object_id)
    if obj is None:
        raise PlanError(f"object {binding.object_id} no longer exists")
    if world.effectively_held(obj.id):
        raise PlanError(f"object {obj.id} is already held")
    source = zones.get(action.from_zone)
    if source is None:
        raise PlanError(f"zone {action.from_zone!r} no longer exists")
    dest = zones.get(action.to_zone)
    if dest is None:
        raise PlanError(f"zone {action.to_zone!r} no longer exists")
    position = world.effective_position(obj.id)
    if not source.rect.contains(position):
        raise PlanError(
            f"object {obj.id} has left the source zone {action.from_zone!r}")

    placement = action.placement
    if isinstance(placement, MiddlePlacement):
        return ActionBinding(obj.id, target_point=dest.rect.center)
    if isinstance(placement, GridPlacement):
        cell = world.free_grid_cell(dest.rect, placement.columns,
                                    placement.rows)
        if cell is None:
            raise PlanError(
                f"no free {placement.columns}x{placement.rows} grid cell"
                f" in zone {action.to_zone!r}")
        return ActionBinding(obj.id, target_point=cell)
    # inside a container: keep the bound one if still valid, else take the
    # lowest-id instance currently in the target zone
    def usable(candidate_id: int) -> bool:
        container = world.objects.get(candidate_id)
        return (container is not None
                and container.category == placement.container
                and container.id != obj.id
                and not world.effectively_held(container.id)
                and dest.rect.contains(world.effective_position(container.id)))

    container_id = binding.container_id
    if container_id is None or not usable(container_id):
        candidates = sorted(
            o.id for o in world.objects.values()
            if o.category == placement.container and usable(o.id))
        if not candidates:
            raise PlanError(
                f"no {placement.container!r} available"
                f" in zone {action.to_zone!r}")
        container_id = candidates[0]
    return ActionBinding(obj.id, container_id=container_id)


def build_plan(action: MoveAction, resolved: ActionBinding, world: World,
               home: Point, move_ms: int = MOVE_MS,
               toggle_ms: int = TOGGLE_MS) -> List[Primitive]:
    """Expand a resolved binding into the fixed ten-primitive plan."""
    grasp = world.effective_position(resolved.object_id)
    if resolved.target_point is not None:
        dest = resolved.target_point
    else:
        dest = world.effective_position(resolved.container_id)
    transit = (round((grasp[0] + dest[0]) / 2, 9),
               round((grasp[1] + dest[1]) / 2, 9))
    return [
        Primitive("move_to", "above_source", grasp, move_ms),
        Primitive("move_to", "descend_source", grasp, move_ms),
        Primitive("toggle_gripper", "close_gripper", grasp, toggle_ms,
                  phase="close"),
        Primitive("move_to", "ascend_source", grasp, move_ms),
        Primitive("move_to", "transit", transit, move_ms),
        Primitive("move_to", "above_dest", dest, move_ms),
        Primitive("move_to", "descend_dest", dest, move_ms),
        Primitive("toggle_gripper", "open_gripper", dest, toggle_ms,
                  phase="open"),
        Primitive("move_to", "ascend_dest", dest, move_ms),
        Primitive("move_to", "home", home, move_ms),
    ]


def plan_action(action: MoveAction, binding: ActionBinding, world: World,
                zones: Dict[str, Zone], home: Point) -> List[Primitive]:
    """Validate a binding and return the ten primitives that carry it out."""
    resolved = resolve_binding(action, binding, world, zones)
    return build_plan(action, resolved, world, home)


# ---------------------------------------------------------------------------
# execution


@dataclass
class Executor:
    """Runs one binding at a time, a primitive per step in stepped mode.

    `step` is fed either a fixed tick (stepped mode, one primitive per call)
    or the wall-clock milliseconds since the previous call (real-time mode,
    where a 500 ms tick typically finishes one 400 ms move and eats into the
    next).  It returns the (kind, payload) events produced during the call.
    """

    home: Point
    move_ms: int = MOVE_MS
    toggle_ms: int = TOGGLE_MS
    _binding: Optional[Binding] = field(default=None, repr=False)
    _action_index: int = 0
    _resolved: Optional[ActionBinding] = field(default=None, repr=False)
    _plan: List[Primitive] = field(default_factory=list, repr=False)
    _primitive_index: int = 0
    _in_flight: bool = False
    _progress_ms: int = 0
    _held_id: Optional[int] = None

    @property
    def idle(self) -> bool:
        return self._binding is None

    @property
    def source_id(self) -> Optional[str]:
        return None if self._binding is None else self._binding.source_id

    def state_payload(self) -> dict:
        if self.idle:
            return {"status": "idle"}
        primitive = self._plan[self._primitive_index] \
            if self._primitive_index < len(self._plan) else None
        return {
            "status": "executing",
            "source_id": self._binding.source_id,
            "source_kind": self._binding.source_kind,
            "action_index": self._action_index,
            "primitive_index": self._primitive_index,
            "primitive": None if primitive is None else primitive.label,
            "held_object": self._held_id,
        }

    # -- lifecycle ----------------------------------------------------------

    def begin(self, binding: Binding, world: World,
              zones: Dict[str, Zone]) -> List[Event]:
        """Accept a binding for execution; emits ActionStarted (or an
        immediate ActionAborted when the binding is already stale)."""
        if not self.idle:
            raise RuntimeError("executor is busy")
        self._binding = binding
        self._action_index = 0
        events: List[Event] = []
        self._start_action(world, zones, events)
        return events

    def abort_all(self, world: World, reason: str) -> List[Event]:
        """Drop the current binding; a held object is set down in place."""
        if self.idle:
            return []
        events: List[Event] = []
        self._abort(world, reason, events)
        return events

    # -- stepping -----------------------------------------------------------

    def step(self, world: World, zones: Dict[str, Zone], *, stepped: bool,
             elapsed_ms: int, paused: bool) -> List[Event]:
        events: List[Event] = []
        if self.idle:
            return events
        if stepped:
            if paused:
                return events
            self._begin_primitive(events)
            self._complete_primitive(world, zones, events, chain=False)
            return events
        budget = elapsed_ms
        while budget > 0 and not self.idle:
            if not self._in_flight:
                if paused:
                    break
                self._begin_primitive(events)
            primitive = self._plan[self._primitive_index]
            remaining = primitive.duration_ms - self._progress_ms
            if budget < remaining:
                self._progress_ms += budget
                break
            budget -= remaining
            self._complete_primitive(world, zones, events, chain=True)
        return events

    # -- internals ----------------------------------------------------------

    def _start_action(self, world: World, zones: Dict[str, Zone],
                      events: List[Event]) -> None:
        action = self._binding.actions[self._action_index]
        binding = self._binding.bindings[self._action_index]
        try:
            resolved = resolve_binding(action, binding, world, zones)
        except PlanError as error:
            events.append(("ActionAborted", {
                "source_id": self._binding.source_id,
                "source_kind": self._binding.source_kind,
                "action_index": self._action_index,
                "object_id": binding.object_id,
                "reason": str(error),
                "placed_at": None,
            }))
            self._clear()
            return
        self._resolved = resolved
        self._plan = build_plan(action, resolved, world, self.home,
                                self.move_ms, self.toggle_ms)
        self._primitive_index = 0
        self._in_flight = False
        self._progress_ms = 0
        events.append(("ActionStarted", {
            "source_id": self._binding.source_id,
            "source_kind": self._binding.source_kind,
            "action_index": self._action_index,
            "object_id": resolved.object_id,
            "action": action.to_payload(),
            "binding": resolved.to_payload(),
        }))

    def _begin_primitive(self, events: List[Event]) -> None:
        primitive = self._plan[self._primitive_index]
        self._in_flight = True
        self._progress_ms = 0
        events.append(("PrimitiveStarted", {
            "source_id": self._binding.source_id,
            "action_index": self._action_index,
            "primitive_index": self._primitive_index,
            **primitive.to_payload(),
        }))

    def _complete_primitive(self, world: World, zones: Dict[str, Zone],
                            events: List[Event], *, chain: bool) -> None:
        primitive = self._plan[self._primitive_index]
        events.append(("PrimitiveCompleted", {
            "source_id": self._binding.source_id,
            "action_index": self._action_index,
            "primitive_index": self._primitive_index,
            "label": primitive.label,
        }))
        self._in_flight = False
        self._progress_ms = 0
        if primitive.phase == "close":
            if not self._grasp(world, events):
                return
        elif primitive.phase == "open":
            if not self._release(world, events):
                return
        self._primitive_index += 1
        if self._primitive_index < len(self._plan):
            return
        events.append(("ActionCompleted", {
            "source_id": self._binding.source_id,
            "source_kind": self._binding.source_kind,
            "action_index": self._action_index,
            "object_id": self._resolved.object_id,
        }))
        self._action_index += 1
        if self._action_index < len(self._binding.actions):
            self._start_action(world, zones, events)
        else:
            self._clear()

    def _grasp(self, world: World, events: List[Event]) -> bool:
        """Close the gripper at the planned point; succeed only when the
        object is still exactly there."""
        obj_id = self._resolved.object_id
        grasp_point = self._plan[0].target
        obj = world.objects.get(obj_id)
        if (obj is None or world.effectively_held(obj_id)
                or world.effective_position(obj_id) != grasp_point):
            self._abort(world, f"object {obj_id} moved before the grasp",
                        events)
            return False
        world.pick_up(obj_id)
        self._held_id = obj_id
        return True

    def _release(self, world: World, events: List[Event]) -> bool:
        """Open the gripper: put the object down at the planned point, or
        into its container when the placement names one."""
        obj_id = self._held_id
        target = self._resolved
        if target.container_id is not None:
            if world.objects.get(target.container_id) is None:
                # the container is gone; set the part down where the plan
                # descended instead of dropping it from the world
                placed_at = self._plan[6].target
                world.put_down(obj_id, placed_at)
                self._held_id = None
                self._abort(
                    world,
                    f"container {target.container_id} disappeared",
                    events, placed_at=placed_at)
                return False
            world.place_inside(obj_id, target.container_id)
        else:
            world.put_down(obj_id, target.target_point)
        self._held_id = None
        return True

    def _abort(self, world: World, reason: str, events: List[Event],
               placed_at: Optional[Point] = None) -> None:
        if self._held_id is not None:
            placed_at = world.effective_position(self._held_id)
            world.put_down(self._held_id, placed_at)
            self._held_id = None
        events.append(("ActionAborted", {
            "source_id": self._binding.source_id,
            "source_kind": self._binding.source_kind,
            "action_index": self._action_index,
            "object_id": None if self._resolved is None
            else self._resolved.object_id,
            "reason": reason,
            "placed_at": None if placed_at is None
            else [round(placed_at[0], 6), round(placed_at[1], 6)],
        }))
        self._clear()

    def _clear(self) -> None:
        self._binding = None
        self._resolved = None
        self._plan = []
        self._action_index = 0
        self._primitive_index = 0
        self._in_flight = False
        self._progress_ms = 0
        self._held_id = None
