"""Scenario definitions: tables, object categories, initial layout.

A scenario is the part of a session that exists before any programming
happens.  It is loaded from YAML, validated as a whole (all problems are
reported, not just the first), and turned into a fresh :class:`World`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Tuple

import yaml

from .world import (CategorySpec, CombinationRule, PerceptionConfig, Point,
                    Rect, World)

PART_FATES = ("absorbed", "attached")


class ScenarioError(ValueError):
    """Raised when a scenario document is malformed; carries every problem."""

    def __init__(self, errors: List[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass(frozen=True)
class ObjectPlacement:
    category: str
    position: Point
    state: Optional[str] = None


@dataclass
class Scenario:
    id: str
    name: str
    tables: Dict[str, Rect]
    home: Point
    categories: List[CategorySpec]
    objects: List[ObjectPlacement]
    combinations: List[CombinationRule] = field(default_factory=list)
    publish_period_ms: int = 500

    @property
    def perception(self) -> PerceptionConfig:
        return PerceptionConfig(
            tuple(c.name for c in self.categories if c.detectable),
            self.publish_period_ms)

    def category(self, name: str) -> Optional[CategorySpec]:
        for spec in self.categories:
            if spec.name == name:
                return spec
        return None

    def build_world(self) -> World:
        """Fresh ground-truth world with the initial objects spawned."""
        world = World(self.categories, self.combinations, self.perception)
        for placement in self.objects:
            world.spawn(placement.category, placement.position, placement.state)
        return world

    def on_table(self, point: Point) -> Optional[str]:
        for name, rect in self.tables.items():
            if rect.contains(point):
                return name
        return None

    def to_payload(self) -> Dict[str, object]:
        return {
            "id": self.id,
            "name": self.name,
            "tables": {name: rect.to_payload()
                       for name, rect in self.tables.items()},
            "home": [round(self.home[0], 6), round(self.home[1], 6)],
            "categories": [c.to_payload() for c in self.categories],
        }


# ---------------------------------------------------------------------------
# parsing


def _parse_point(value: object, where: str, errors: List[str]) -> Point:
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) for v in value)):
        return (float(value[0]), float(value[1]))
    errors.append(f"{where}: expected [x, y] pair, got {value!r}")
    return (0.0, 0.0)


def _parse_rect(value: object, where: str, errors: List[str]) -> Rect:
    if not isinstance(value, dict):
        errors.append(f"{where}: expected a mapping with x/y/width/height")
        return Rect(0.0, 0.0, 1.0, 1.0)
    missing = [k for k in ("x", "y", "width", "height") if k not in value]
    if missing:
        errors.append(f"{where}: missing {', '.join(missing)}")
        return Rect(0.0, 0.0, 1.0, 1.0)
    try:
        rect = Rect(float(value["x"]), float(value["y"]),
                    float(value["width"]), float(value["height"]))
    except (TypeError, ValueError):
        errors.append(f"{where}: x/y/width/height must be numbers")
        return Rect(0.0, 0.0, 1.0, 1.0)
    if rect.width <= 0 or rect.height <= 0:
        errors.append(f"{where}: width and height must be positive")
    return rect


def _parse_category(entry: object, index: int, errors: List[str]) -> Optional[CategorySpec]:
    where = f"categories[{index}]"
    if not isinstance(entry, dict) or "name" not in entry:
        errors.append(f"{where}: expected a mapping with a name")
        return None
    states = entry.get("states", [])
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        errors.append(f"{where}: states must be a list of strings")
        states = []
    return CategorySpec(
        name=str(entry["name"]),
        color=str(entry.get("color", "gray")),
        detectable=bool(entry.get("detectable", True)),
        is_container=bool(entry.get("is_container", False)),
        states=tuple(states),
    )


def parse_scenario(data: object, source: str = "scenario") -> Scenario:
    """Validate a decoded YAML document and build a Scenario from it."""
    errors: List[str] = []
    if not isinstance(data, dict):
        raise ScenarioError([f"{source}: document must be a mapping"])

    name = str(data.get("name", "")).strip()
    if not name:
        errors.append("name: required")
    scenario_id = str(data.get("id", "")).strip() or name.lower().replace(" ", "-")

    tables: Dict[str, Rect] = {}
    raw_tables = data.get("tables")
    if not isinstance(raw_tables, dict) or not raw_tables:
        errors.append("tables: at least one table rectangle is required")
    else:
        for table_name, raw in raw_tables.items():
            tables[str(table_name)] = _parse_rect(raw, f"tables.{table_name}", errors)

    if "home" in data:
        home = _parse_point(data["home"], "home", errors)
    elif tables:
        home = next(iter(tables.values())).center
    else:
        home = (0.0, 0.0)

    publish_period_ms = 500
    raw_perception = data.get("perception")
    if raw_perception is not None:
        if not isinstance(raw_perception, dict):
            errors.append("perception: expected a mapping")
        else:
            try:
                publish_period_ms = int(
                    raw_perception.get("publish_period_ms", 500))
            except (TypeError, ValueError):
                errors.append("perception.publish_period_ms: must be an integer")
            if publish_period_ms <= 0:
                errors.append("perception.publish_period_ms: must be positive")
                publish_period_ms = 500

    categories: List[CategorySpec] = []
    raw_categories = data.get("categories")
    if not isinstance(raw_categories, list) or not raw_categories:
        errors.append("categories: at least one category is required")
    else:
        for i, entry in enumerate(raw_categories):
            spec = _parse_category(entry, i, errors)
            if spec is not None:
                categories.append(spec)
    by_name = {c.name: c for c in categories}
    if len(by_name) != len(categories):
        errors.append("categories: names must be unique")

    objects: List[ObjectPlacement] = []
    for i, entry in enumerate(data.get("objects", []) or []):
        where = f"objects[{i}]"
        if not isinstance(entry, dict) or "category" not in entry:
            errors.append(f"{where}: expected a mapping with category and position")
            continue
        category = str(entry["category"])
        spec = by_name.get(category)
        if spec is None:
            errors.append(f"{where}: unknown category {category!r}")
            continue
        position = _parse_point(entry.get("position"), f"{where}.position", errors)
        state = entry.get("state")
        if state is not None:
            state = str(state)
            if spec.states and state not in spec.states:
                errors.append(f"{where}: category {category!r} has no state {state!r}")
        elif spec.states:
            state = spec.states[0]
        if tables and not any(rect.contains(position) for rect in tables.values()):
            errors.append(f"{where}: position {list(position)} is on no table")
        objects.append(ObjectPlacement(category, position, state))

    combinations: List[CombinationRule] = []
    for i, entry in enumerate(data.get("combinations", []) or []):
        where = f"combinations[{i}]"
        if not isinstance(entry, dict):
            errors.append(f"{where}: expected a mapping")
            continue
        part = str(entry.get("part", ""))
        target = str(entry.get("target", ""))
        fate = str(entry.get("fate", "absorbed"))
        if part not in by_name:
            errors.append(f"{where}: unknown part category {part!r}")
        if target not in by_name:
            errors.append(f"{where}: unknown target category {target!r}")
        elif not by_name[target].is_container:
            errors.append(f"{where}: target {target!r} is not a container")
        if fate not in PART_FATES:
            errors.append(f"{where}: fate must be one of {PART_FATES}")
        requires = entry.get("requires")
        yields = entry.get("yields")
        if target in by_name:
            target_states = by_name[target].states
            for label, value in (("requires", requires), ("yields", yields)):
                if value is not None and str(value) not in target_states:
                    errors.append(
                        f"{where}: {label} state {value!r} not declared on {target!r}")
        combinations.append(CombinationRule(
            part_category=part,
            target_category=target,
            required_target_state=None if requires is None else str(requires),
            resulting_target_state=None if yields is None else str(yields),
            part_fate=fate,
        ))

    if errors:
        raise ScenarioError([f"{source}: {e}" for e in errors])
    return Scenario(scenario_id, name, tables, home, categories, objects,
                    combinations, publish_period_ms)


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle)
    return parse_scenario(data, source=os.path.basename(path))


# ---------------------------------------------------------------------------
# packaged fixtures


def fixture_dir(kind: str) -> "resources.abc.Traversable":
    return resources.files("workcell") / "fixtures" / kind


def list_fixtures(kind: str) -> List[str]:
    try:
        entries = fixture_dir(kind).iterdir()
    except FileNotFoundError:
        return []
    return sorted(p.name[:-5] for p in entries if p.name.endswith(".yaml"))


def resolve_fixture(kind: str, ref: str) -> str:
    """Turn a file path or a bare fixture name into a readable path."""
    if os.path.exists(ref):
        return ref
    candidate = fixture_dir(kind) / f"{ref}.yaml"
    if candidate.is_file():
        return str(candidate)
    known = ", ".join(list_fixtures(kind)) or "none"
    raise FileNotFoundError(
        f"no such {kind[:-1] if kind.endswith('s') else kind} {ref!r}"
        f" (known: {known})")
