"""Ground-truth workspace state and the mutations applied to it.

The simulator keeps one authoritative model of the table: rectangular work
surfaces, colored zones drawn by the operator, and movable objects.  Robot
and human manipulations all funnel through :class:`World` so containment,
attachment, and object states stay consistent.  Planning code never reads
the ground truth directly; it sees an immutable :class:`PerceivedState`
filtered by per-category detectability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

Point = Tuple[float, float]

# Colors offered for newly drawn zones, in palette order.
ZONE_COLORS = ("green", "yellow", "blue", "red", "orange", "purple", "cyan", "pink")


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle; containment is closed on all edges."""

    x: float
    y: float
    width: float
    height: float

    def contains(self, point: Point) -> bool:
        px, py = point
        return (
            self.x <= px <= self.x + self.width
            and self.y <= py <= self.y + self.height
        )

    @property
    def center(self) -> Point:
        # rounded at nanometer scale, matching grid_cells
        return (round(self.x + self.width / 2.0, 9),
                round(self.y + self.height / 2.0, 9))

    def to_payload(self) -> Dict[str, float]:
        return {
            "x": round(self.x, 6),
            "y": round(self.y, 6),
            "width": round(self.width, 6),
            "height": round(self.height, 6),
        }

    @staticmethod
    def from_payload(data: Dict[str, float]) -> "Rect":
        return Rect(
            float(data["x"]), float(data["y"]),
            float(data["width"]), float(data["height"]),
        )


def grid_cells(rect: Rect, columns: int, rows: int) -> List[Point]:
    """Cell centers of a columns-by-rows grid over rect, row major from the
    low-y, low-x corner.

    Coordinates are rounded at nanometer scale so cell centers of
    round-number rectangles come out exact.
    """
    if columns < 1 or rows < 1:
        raise ValueError("grid needs at least one column and one row")
    cell_w = rect.width / columns
    cell_h = rect.height / rows
    cells = []
    for r in range(rows):
        for c in range(columns):
            cells.append((round(rect.x + (c + 0.5) * cell_w, 9),
                          round(rect.y + (r + 0.5) * cell_h, 9)))
    return cells


def next_free_cell(rect: Rect, columns: int, rows: int,
                   occupied: Iterable[Point],
                   clearance: Optional[float] = None) -> Optional[Point]:
    """First grid cell (row major) with no listed centroid within clearance
    of its center, or None when every cell is taken.

    The default clearance is half the smaller cell edge, so a centroid sitting
    on a cell center blocks exactly that cell.
    """
    if clearance is None:
        clearance = min(rect.width / columns, rect.height / rows) / 2.0
    points = list(occupied)
    for cell in grid_cells(rect, columns, rows):
        blocked = any(
            (px - cell[0]) ** 2 + (py - cell[1]) ** 2 < clearance ** 2
            for px, py in points)
        if not blocked:
            return cell
    return None


# ---------------------------------------------------------------------------
# scenario-level definitions


@dataclass(frozen=True)
class CategorySpec:
    """An object category: how it looks to perception and what it can do."""

    name: str
    color: str = "gray"
    detectable: bool = True
    is_container: bool = False
    states: Tuple[str, ...] = ()

    def to_payload(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "color": self.color,
            "detectable": self.detectable,
            "is_container": self.is_container,
            "states": list(self.states),
        }


@dataclass(frozen=True)
class CombinationRule:
    """Effect of joining a part with a target object.

    The part is either absorbed (disappears into the target) or attached
    (keeps its identity and rides along).  A required target state of None
    matches any state.
    """

    part_category: str
    target_category: str
    required_target_state: Optional[str]
    resulting_target_state: Optional[str]
    part_fate: str  # "absorbed" | "attached"

    def matches(self, part_category: str, target_category: str,
                target_state: Optional[str]) -> bool:
        if part_category != self.part_category:
            return False
        if target_category != self.target_category:
            return False
        if self.required_target_state is not None:
            return target_state == self.required_target_state
        return True


@dataclass(frozen=True)
class PerceptionConfig:
    """Which categories the simulated camera reports, and how often."""

    detectable: Tuple[str, ...]
    publish_period_ms: int = 500

    def __post_init__(self) -> None:
        if self.publish_period_ms <= 0:
            raise ValueError("publish period must be positive")

    def sees(self, category: str) -> bool:
        return category in self.detectable


# ---------------------------------------------------------------------------
# mutable ground truth


@dataclass
class Zone:
    """Operator-drawn rectangle on a table, identified by id and color."""

    id: str
    color: str
    rect: Rect
    created_at: int = 0

    def to_payload(self) -> Dict[str, object]:
        return {"id": self.id, "color": self.color, "rect": self.rect.to_payload()}


@dataclass
class WorkspaceObject:
    """A movable object on the table.

    position is authoritative only for top-level objects; an object with
    contained_in set sits at (and moves with) its container.
    """

    id: int
    category: str
    position: Point
    state: Optional[str] = None
    contained_in: Optional[int] = None
    held: bool = False


@dataclass(frozen=True)
class PerceivedObject:
    id: int
    category: str
    position: Point
    state: Optional[str]
    contained_in: Optional[int]
    held: bool

    def to_payload(self) -> Dict[str, object]:
        return {
            "id": self.id,
            "category": self.category,
            "position": [round(self.position[0], 6), round(self.position[1], 6)],
            "state": self.state,
            "contained_in": self.contained_in,
            "held": self.held,
        }


@dataclass(frozen=True)
class PerceivedState:
    """Immutable camera view of one tick: detected objects plus zones."""

    tick: int
    objects: Tuple[PerceivedObject, ...]
    zones: Tuple[Zone, ...]

    def objects_of(self, category: str) -> Tuple[PerceivedObject, ...]:
        return tuple(o for o in self.objects if o.category == category)

    def zone(self, zone_id: str) -> Optional[Zone]:
        for z in self.zones:
            if z.id == zone_id:
                return z
        return None

    def to_payload(self) -> Dict[str, object]:
        return {
            "tick": self.tick,
            "objects": [o.to_payload() for o in self.objects],
            "zones": [z.to_payload() for z in self.zones],
        }


def objects_in_zone(state: PerceivedState, zone_id: str,
                    category: Optional[str] = None) -> List[PerceivedObject]:
    """Objects whose centroid lies in the zone.  Held objects are off the
    table and never count."""
    zone = state.zone(zone_id)
    if zone is None:
        return []
    found = []
    for obj in state.objects:
        if obj.held:
            continue
        if category is not None and obj.category != category:
            continue
        if zone.rect.contains(obj.position):
            found.append(obj)
    return found


# ---------------------------------------------------------------------------
# world


class World:
    """Authoritative object store with robot and human manipulation verbs."""

    def __init__(self, categories: Sequence[CategorySpec],
                 combinations: Sequence[CombinationRule] = (),
                 perception: Optional[PerceptionConfig] = None):
        self.categories: Dict[str, CategorySpec] = {c.name: c for c in categories}
        self.combinations: List[CombinationRule] = list(combinations)
        if perception is None:
            perception = PerceptionConfig(
                tuple(c.name for c in categories if c.detectable))
        self.perception = perception
        self.objects: Dict[int, WorkspaceObject] = {}
        self._next_id = 1

    # -- lookup helpers

    def category(self, name: str) -> CategorySpec:
        try:
            return self.categories[name]
        except KeyError:
            raise KeyError(f"unknown category: {name!r}") from None

    def get(self, obj_id: int) -> WorkspaceObject:
        try:
            return self.objects[obj_id]
        except KeyError:
            raise KeyError(f"no object with id {obj_id}") from None

    def effective_position(self, obj_id: int) -> Point:
        """Table position, following the containment chain."""
        obj = self.get(obj_id)
        seen = set()
        while obj.contained_in is not None and obj.id not in seen:
            seen.add(obj.id)
            obj = self.get(obj.contained_in)
        return obj.position

    def effectively_held(self, obj_id: int) -> bool:
        obj = self.get(obj_id)
        seen = set()
        while True:
            if obj.held:
                return True
            if obj.contained_in is None or obj.id in seen:
                return False
            seen.add(obj.id)
            obj = self.get(obj.contained_in)

    def contents_of(self, obj_id: int) -> List[WorkspaceObject]:
        return [o for o in self.objects.values() if o.contained_in == obj_id]

    # -- mutations

    def spawn(self, category: str, position: Point,
              state: Optional[str] = None) -> WorkspaceObject:
        """Add a new object; ids are assigned in spawn order starting at 1."""
        spec = self.category(category)
        if state is None and spec.states:
            state = spec.states[0]
        if state is not None and spec.states and state not in spec.states:
            raise ValueError(
                f"category {category!r} has no state {state!r}")
        obj = WorkspaceObject(self._next_id, category, position, state)
        self.objects[obj.id] = obj
        self._next_id += 1
        return obj

    def remove(self, obj_id: int) -> None:
        """Remove an object together with everything inside it."""
        for child in self.contents_of(obj_id):
            self.remove(child.id)
        self.objects.pop(obj_id, None)

    def pick_up(self, obj_id: int) -> None:
        """Attach an object to the gripper; it leaves zone membership and,
        if it sat inside a container, is taken out of it."""
        obj = self.get(obj_id)
        obj.contained_in = None
        obj.held = True

    def put_down(self, obj_id: int, position: Point) -> None:
        obj = self.get(obj_id)
        obj.held = False
        self._move_tree(obj, position)

    def place_inside(self, obj_id: int, container_id: int) -> Optional[CombinationRule]:
        """Put an object into a container; a matching combination rule, if
        any, is applied and returned.  An absorbed part is removed."""
        obj = self.get(obj_id)
        container = self.get(container_id)
        if container_id == obj_id:
            raise ValueError("object cannot contain itself")
        if not self.category(container.category).is_container:
            raise ValueError(f"category {container.category!r} is not a container")
        obj.held = False
        rule = self.find_combination(obj.category, container.category, container.state)
        if rule is not None:
            if rule.resulting_target_state is not None:
                container.state = rule.resulting_target_state
            if rule.part_fate == "absorbed":
                self.remove(obj_id)
                return rule
        obj.contained_in = container_id
        self._move_tree(obj, container.position)
        return rule

    def combine(self, part_id: int, target_id: int) -> CombinationRule:
        """Join a part with a target object; only defined combinations work."""
        part = self.get(part_id)
        target = self.get(target_id)
        rule = self.find_combination(part.category, target.category, target.state)
        if rule is None:
            raise ValueError(
                f"no combination of {part.category!r} with {target.category!r}"
                f" in state {target.state!r}")
        if rule.resulting_target_state is not None:
            target.state = rule.resulting_target_state
        if rule.part_fate == "absorbed":
            self.remove(part_id)
        else:
            part.contained_in = target_id
            self._move_tree(part, target.position)
        return rule

    def find_combination(self, part_category: str, target_category: str,
                         target_state: Optional[str]) -> Optional[CombinationRule]:
        for rule in self.combinations:
            if rule.matches(part_category, target_category, target_state):
                return rule
        return None

    def relocate(self, obj_id: int, position: Point) -> None:
        """Teleport an object to a table position, pulling it out of any
        container and dragging its own contents along."""
        obj = self.get(obj_id)
        obj.contained_in = None
        obj.held = False
        self._move_tree(obj, position)

    def _move_tree(self, obj: WorkspaceObject, position: Point) -> None:
        obj.position = position
        for child in self.contents_of(obj.id):
            self._move_tree(child, position)

    def set_state(self, obj_id: int, state: Optional[str]) -> None:
        obj = self.get(obj_id)
        spec = self.category(obj.category)
        if state is not None and spec.states and state not in spec.states:
            raise ValueError(f"category {obj.category!r} has no state {state!r}")
        obj.state = state

    # -- perception

    def perceived_view(self, tick: int, zones: Iterable[Zone]) -> PerceivedState:
        """Snapshot of all detectable objects, ordered by id."""
        percepts = []
        for obj_id in sorted(self.objects):
            obj = self.objects[obj_id]
            if not self.perception.sees(obj.category):
                continue
            container = obj.contained_in
            if container is not None:
                parent = self.objects.get(container)
                if parent is None or not self.perception.sees(parent.category):
                    container = None
            percepts.append(PerceivedObject(
                id=obj.id,
                category=obj.category,
                position=self.effective_position(obj.id),
                state=obj.state,
                contained_in=container,
                held=self.effectively_held(obj.id),
            ))
        return PerceivedState(tick, tuple(percepts), tuple(zones))

    def free_grid_cell(self, rect: Rect, columns: int, rows: int) -> Optional[Point]:
        """Next open grid cell as the robot would judge it: only detectable,
        free-standing, unheld objects block a cell."""
        occupied = [o.position for o in self.objects.values()
                    if self.perception.sees(o.category)
                    and o.contained_in is None and not o.held]
        return next_free_cell(rect, columns, rows, occupied)
