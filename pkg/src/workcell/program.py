"""The operator's program: zones, trigger-action rules, manual buttons.

A rule is a conjunction of conditions plus an ordered list of move actions.
Conditions come in three kinds: an object of a category is in a zone, no
object of a category is in a zone, or an object of a category has a state.
The program is a live document; rules and zones can be added or removed
while the session runs, and the whole document round-trips through YAML.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import yaml

from .scenario import Scenario
from .world import Rect, Zone

IS_IN = "is_in"
IS_NOT_IN = "is_not_in"
HAS_STATE = "has_state"
CONDITION_KINDS = (IS_IN, IS_NOT_IN, HAS_STATE)


class ProgramError(ValueError):
    """Raised for invalid edits or documents; carries every problem found."""

    def __init__(self, errors: List[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


# ---------------------------------------------------------------------------
# conditions and actions


@dataclass(frozen=True)
class Condition:
    kind: str
    category: str
    zone: Optional[str] = None
    state: Optional[str] = None

    def to_payload(self) -> Dict[str, object]:
        return {"kind": self.kind, "category": self.category,
                "zone": self.zone, "state": self.state}

    @staticmethod
    def from_payload(data: Dict[str, object]) -> "Condition":
        return Condition(str(data["kind"]), str(data["category"]),
                         data.get("zone"), data.get("state"))


def is_in(category: str, zone: str) -> Condition:
    return Condition(IS_IN, category, zone=zone)


def is_not_in(category: str, zone: str) -> Condition:
    return Condition(IS_NOT_IN, category, zone=zone)


def has_state(category: str, state: str) -> Condition:
    return Condition(HAS_STATE, category, state=state)


@dataclass(frozen=True)
class GridPlacement:
    columns: int
    rows: int

    def to_payload(self) -> Dict[str, object]:
        return {"kind": "grid", "columns": self.columns, "rows": self.rows}


@dataclass(frozen=True)
class MiddlePlacement:
    def to_payload(self) -> Dict[str, object]:
        return {"kind": "middle"}


@dataclass(frozen=True)
class InsidePlacement:
    container: str

    def to_payload(self) -> Dict[str, object]:
        return {"kind": "inside", "container": self.container}


Placement = Union[GridPlacement, MiddlePlacement, InsidePlacement]


def placement_from_payload(data: Dict[str, object]) -> Placement:
    kind = data.get("kind")
    if kind == "grid":
        return GridPlacement(int(data["columns"]), int(data["rows"]))
    if kind == "middle":
        return MiddlePlacement()
    if kind == "inside":
        return InsidePlacement(str(data["container"]))
    raise ProgramError([f"unknown placement kind {kind!r}"])


@dataclass(frozen=True)
class MoveAction:
    category: str
    from_zone: str
    to_zone: str
    placement: Placement

    def to_payload(self) -> Dict[str, object]:
        return {"category": self.category, "from_zone": self.from_zone,
                "to_zone": self.to_zone, "placement": self.placement.to_payload()}

    @staticmethod
    def from_payload(data: Dict[str, object]) -> "MoveAction":
        return MoveAction(str(data["category"]), str(data["from_zone"]),
                          str(data["to_zone"]),
                          placement_from_payload(data.get("placement") or {}))


@dataclass(frozen=True)
class Rule:
    id: str
    conditions: Tuple[Condition, ...]
    actions: Tuple[MoveAction, ...]
    enabled: bool = True
    created_at: int = 0

    def to_payload(self) -> Dict[str, object]:
        return {
            "id": self.id,
            "conditions": [c.to_payload() for c in self.conditions],
            "actions": [a.to_payload() for a in self.actions],
            "enabled": self.enabled,
            "created_at": self.created_at,
        }

    @staticmethod
    def from_payload(data: Dict[str, object]) -> "Rule":
        return Rule(
            id=str(data.get("id", "")),
            conditions=tuple(Condition.from_payload(c)
                             for c in data.get("conditions", []) or []),
            actions=tuple(MoveAction.from_payload(a)
                          for a in data.get("actions", []) or []),
            enabled=bool(data.get("enabled", True)),
            created_at=int(data.get("created_at", 0)),
        )


@dataclass
class ManualTrigger:
    """A labeled button that runs its actions once per press; pending is
    consumed when the press dispatches."""

    id: str
    label: str
    actions: Tuple[MoveAction, ...]
    pending: bool = False

    def to_payload(self) -> Dict[str, object]:
        return {"id": self.id, "label": self.label,
                "actions": [a.to_payload() for a in self.actions],
                "pending": self.pending}

    @staticmethod
    def from_payload(data: Dict[str, object]) -> "ManualTrigger":
        return ManualTrigger(
            id=str(data.get("id", "")),
            label=str(data.get("label", data.get("id", ""))),
            actions=tuple(MoveAction.from_payload(a)
                          for a in data.get("actions", []) or []),
            pending=bool(data.get("pending", False)),
        )


# ---------------------------------------------------------------------------
# descriptions shown in prompts and program summaries


def describe_condition(condition: Condition) -> str:
    if condition.kind == IS_IN:
        return f"{condition.category} is in {condition.zone}"
    if condition.kind == IS_NOT_IN:
        return f"no {condition.category} is in {condition.zone}"
    return f"{condition.category} is {condition.state}"


def describe_placement(placement: Placement) -> str:
    if isinstance(placement, GridPlacement):
        return f"on a {placement.columns}x{placement.rows} grid"
    if isinstance(placement, InsidePlacement):
        return f"inside a {placement.container}"
    return "in the middle"


def describe_action(action: MoveAction) -> str:
    return (f"move {action.category} from {action.from_zone}"
            f" to {action.to_zone}, place {describe_placement(action.placement)}")


def describe_rule(rule: Rule) -> str:
    conditions = " and ".join(describe_condition(c) for c in rule.conditions)
    actions = "; then ".join(describe_action(a) for a in rule.actions)
    return f"if {conditions} then {actions}"


# ---------------------------------------------------------------------------
# conflict preferences


class PreferenceStore:
    """Remembered conflict resolutions, keyed by the exact set of rules that
    clashed.  A different set of contenders asks again."""

    def __init__(self) -> None:
        self._choices: Dict[FrozenSet[str], str] = {}

    def remember(self, contenders: Sequence[str], winner: str) -> None:
        self._choices[frozenset(contenders)] = winner

    def recall(self, contenders: Sequence[str]) -> Optional[str]:
        return self._choices.get(frozenset(contenders))

    def forget_rule(self, rule_id: str) -> None:
        """Drop every stored choice that involves the rule."""
        self._choices = {key: winner for key, winner in self._choices.items()
                         if rule_id not in key and winner != rule_id}

    def to_payload(self) -> List[Dict[str, object]]:
        entries = [{"rules": sorted(key), "winner": winner}
                   for key, winner in self._choices.items()]
        entries.sort(key=lambda e: e["rules"])
        return entries

    @staticmethod
    def from_payload(data: Sequence[Dict[str, object]]) -> "PreferenceStore":
        store = PreferenceStore()
        for entry in data or []:
            store.remember([str(r) for r in entry.get("rules", [])],
                           str(entry.get("winner", "")))
        return store


# ---------------------------------------------------------------------------
# the program document


class Program:
    """Zones, rules, buttons, and remembered preferences for one session."""

    def __init__(self) -> None:
        self.zones: Dict[str, Zone] = {}
        self.rules: Dict[str, Rule] = {}
        self.buttons: Dict[str, ManualTrigger] = {}
        self.preferences = PreferenceStore()
        self.paused = False
        self._seq = {"zone": 0, "rule": 0, "button": 0}

    # -- id assignment (ids are never reused, even after deletion)

    def _fresh_id(self, kind: str, requested: str) -> str:
        if requested:
            return requested
        while True:
            self._seq[kind] += 1
            candidate = f"{kind}-{self._seq[kind]}"
            if candidate not in self._collection(kind):
                return candidate

    def _collection(self, kind: str) -> Dict[str, object]:
        return {"zone": self.zones, "rule": self.rules,
                "button": self.buttons}[kind]

    # -- zones

    def add_zone(self, rect: Rect, color: str, zone_id: str = "",
                 created_at: int = 0) -> Zone:
        zone_id = self._fresh_id("zone", zone_id)
        errors = []
        if zone_id in self.zones:
            errors.append(f"zone {zone_id!r} already exists")
        if any(z.color == color for z in self.zones.values()):
            errors.append(f"a {color} zone already exists")
        if errors:
            raise ProgramError(errors)
        zone = Zone(zone_id, color, rect, created_at)
        self.zones[zone_id] = zone
        return zone

    def update_zone(self, zone_id: str, rect: Optional[Rect] = None,
                    color: Optional[str] = None) -> Zone:
        if zone_id not in self.zones:
            raise ProgramError([f"no zone {zone_id!r}"])
        zone = self.zones[zone_id]
        if color is not None and color != zone.color:
            if any(z.color == color for z in self.zones.values()):
                raise ProgramError([f"a {color} zone already exists"])
            zone.color = color
        if rect is not None:
            zone.rect = rect
        return zone

    def delete_zone(self, zone_id: str) -> List[str]:
        """Remove a zone; rules that reference it are disabled, not deleted.
        Returns the ids of the rules that were disabled."""
        if zone_id not in self.zones:
            raise ProgramError([f"no zone {zone_id!r}"])
        del self.zones[zone_id]
        disabled = []
        for rule_id, rule in list(self.rules.items()):
            if rule.enabled and zone_id in rule_zone_refs(rule):
                self.rules[rule_id] = replace(rule, enabled=False)
                disabled.append(rule_id)
        return disabled

    # -- rules

    def add_rule(self, rule: Rule, scenario: Scenario) -> Rule:
        rule = replace(rule, id=self._fresh_id("rule", rule.id))
        errors = validate_rule(rule, scenario, self.zones)
        if rule.id in self.rules:
            errors.append(f"rule {rule.id!r} already exists")
        if errors:
            raise ProgramError(errors)
        self.rules[rule.id] = rule
        return rule

    def delete_rule(self, rule_id: str) -> None:
        if rule_id not in self.rules:
            raise ProgramError([f"no rule {rule_id!r}"])
        del self.rules[rule_id]
        self.preferences.forget_rule(rule_id)

    def enabled_rules(self) -> List[Rule]:
        return [r for r in self.rules.values() if r.enabled]

    # -- buttons

    def add_button(self, button: ManualTrigger, scenario: Scenario) -> ManualTrigger:
        button_id = self._fresh_id("button", button.id)
        button = ManualTrigger(button_id, button.label or button_id, button.actions)
        errors = []
        for i, action in enumerate(button.actions):
            errors.extend(validate_action(action, scenario, self.zones,
                                          f"actions[{i}]"))
        if not button.actions:
            errors.append("a button needs at least one action")
        if button.id in self.buttons:
            errors.append(f"button {button.id!r} already exists")
        if errors:
            raise ProgramError(errors)
        self.buttons[button.id] = button
        return button

    def delete_button(self, button_id: str) -> None:
        if button_id not in self.buttons:
            raise ProgramError([f"no button {button_id!r}"])
        del self.buttons[button_id]

    def press_button(self, button_id: str) -> ManualTrigger:
        if button_id not in self.buttons:
            raise ProgramError([f"no button {button_id!r}"])
        button = self.buttons[button_id]
        button.pending = True
        return button

    # -- serialization

    def to_payload(self) -> Dict[str, object]:
        return {
            "zones": [z.to_payload() for z in self.zones.values()],
            "rules": [r.to_payload() for r in self.rules.values()],
            "buttons": [b.to_payload() for b in self.buttons.values()],
            "preferences": self.preferences.to_payload(),
            "paused": self.paused,
        }

    @staticmethod
    def from_payload(data: Dict[str, object], scenario: Scenario) -> "Program":
        program = Program()
        errors: List[str] = []
        for i, entry in enumerate(data.get("zones", []) or []):
            try:
                rect = Rect.from_payload(entry["rect"])
                program.add_zone(rect, str(entry.get("color", "green")),
                                 str(entry.get("id", "")))
            except (KeyError, TypeError, ProgramError):
                errors.append(f"zones[{i}]: invalid zone entry")
        for i, entry in enumerate(data.get("rules", []) or []):
            try:
                program.add_rule(Rule.from_payload(entry), scenario)
            except ProgramError as exc:
                errors.extend(f"rules[{i}]: {e}" for e in exc.errors)
            except (KeyError, TypeError):
                errors.append(f"rules[{i}]: invalid rule entry")
        for i, entry in enumerate(data.get("buttons", []) or []):
            try:
                program.add_button(ManualTrigger.from_payload(entry), scenario)
            except ProgramError as exc:
                errors.extend(f"buttons[{i}]: {e}" for e in exc.errors)
            except (KeyError, TypeError):
                errors.append(f"buttons[{i}]: invalid button entry")
        program.preferences = PreferenceStore.from_payload(
            data.get("preferences", []))
        program.paused = bool(data.get("paused", False))
        if errors:
            raise ProgramError(errors)
        return program


def save_program(program: Program, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(program.to_payload(), handle, sort_keys=False)


def load_program(path: str, scenario: Scenario) -> Program:
    with open(path, "r", encoding="utf-8") as handle:
        data = yaml.safe_load(handle) or {}
    return Program.from_payload(data, scenario)


# ---------------------------------------------------------------------------
# validation


def rule_zone_refs(rule: Rule) -> FrozenSet[str]:
    refs = set()
    for condition in rule.conditions:
        if condition.zone is not None:
            refs.add(condition.zone)
    for action in rule.actions:
        refs.add(action.from_zone)
        refs.add(action.to_zone)
    return frozenset(refs)


def validate_condition(condition: Condition, scenario: Scenario,
                       zones: Dict[str, Zone], where: str) -> List[str]:
    errors = []
    if condition.kind not in CONDITION_KINDS:
        errors.append(f"{where}: unknown condition kind {condition.kind!r}")
        return errors
    spec = scenario.category(condition.category)
    if spec is None:
        errors.append(f"{where}: unknown category {condition.category!r}")
    if condition.kind in (IS_IN, IS_NOT_IN):
        if not condition.zone:
            errors.append(f"{where}: a zone is required")
        elif condition.zone not in zones:
            errors.append(f"{where}: no zone {condition.zone!r}")
    else:
        if not condition.state:
            errors.append(f"{where}: a state is required")
        elif spec is not None and condition.state not in spec.states:
            errors.append(f"{where}: category {condition.category!r}"
                          f" has no state {condition.state!r}")
    return errors


def validate_action(action: MoveAction, scenario: Scenario,
                    zones: Dict[str, Zone], where: str) -> List[str]:
    errors = []
    if scenario.category(action.category) is None:
        errors.append(f"{where}: unknown category {action.category!r}")
    for label, zone_id in (("from_zone", action.from_zone),
                           ("to_zone", action.to_zone)):
        if not zone_id:
            errors.append(f"{where}: {label} is required")
        elif zone_id not in zones:
            errors.append(f"{where}: no zone {zone_id!r}")
    if isinstance(action.placement, GridPlacement):
        if action.placement.columns < 1 or action.placement.rows < 1:
            errors.append(f"{where}: grid needs at least one column and row")
    elif isinstance(action.placement, InsidePlacement):
        container = scenario.category(action.placement.container)
        if container is None:
            errors.append(f"{where}: unknown container category"
                          f" {action.placement.container!r}")
        elif not container.is_container:
            errors.append(f"{where}: category {action.placement.container!r}"
                          f" is not a container")
    return errors


def validate_rule(rule: Rule, scenario: Scenario,
                  zones: Dict[str, Zone]) -> List[str]:
    errors = []
    if not rule.conditions:
        errors.append("a rule needs at least one condition")
    if not rule.actions:
        errors.append("a rule needs at least one action")
    for i, condition in enumerate(rule.conditions):
        errors.extend(validate_condition(condition, scenario, zones,
                                         f"conditions[{i}]"))
    for i, action in enumerate(rule.actions):
        errors.extend(validate_action(action, scenario, zones, f"actions[{i}]"))
    return errors
