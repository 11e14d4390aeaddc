"""Trigger evaluation over perceived snapshots.

Every tick with an idle robot, each enabled rule's conditions are checked
against the latest snapshot.  Conditions on the same category as an action
double as filters on that action's candidates; the absence condition is a
pure boolean and filters nothing.  A rule whose conditions all hold, whose
every action has a candidate, and whose placements are feasible is flagged
with a concrete binding: lowest-id candidate, first free grid cell,
lowest-id container.  Several simultaneous flags become a priority
conflict unless a remembered preference covers the exact contender set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

from .program import (HAS_STATE, IS_IN, IS_NOT_IN, Condition, GridPlacement,
                      InsidePlacement, MiddlePlacement, MoveAction, Program)
from .world import (PerceivedState, Point, next_free_cell, objects_in_zone)


@dataclass(frozen=True)
class ActionBinding:
    """Concrete choices for one move: which object, where it lands."""

    object_id: int
    target_point: Optional[Point] = None
    container_id: Optional[int] = None

    def to_payload(self) -> dict:
        point = None
        if self.target_point is not None:
            point = [round(self.target_point[0], 6),
                     round(self.target_point[1], 6)]
        return {"object_id": self.object_id, "target_point": point,
                "container_id": self.container_id}


@dataclass(frozen=True)
class Binding:
    """A flagged rule or button with every action bound."""

    source_id: str
    source_kind: str  # "rule" | "button"
    actions: Tuple[MoveAction, ...]
    bindings: Tuple[ActionBinding, ...]

    def to_payload(self) -> dict:
        return {
            "source_id": self.source_id,
            "source_kind": self.source_kind,
            "actions": [a.to_payload() for a in self.actions],
            "bindings": [b.to_payload() for b in self.bindings],
        }


@dataclass(frozen=True)
class Disposition:
    """What the tick should do with this round of flags."""

    kind: str  # "none" | "dispatch" | "conflict"
    binding: Optional[Binding]
    candidates: Optional[Tuple[str, ...]]


# ---------------------------------------------------------------------------
# conditions


def evaluate_condition(condition: Condition,
                       state: PerceivedState) -> Tuple[bool, Optional[str]]:
    """Truth of one condition, plus a warning when it references a zone
    that no longer exists (such a condition is simply false)."""
    if condition.kind == HAS_STATE:
        value = any(o.category == condition.category
                    and o.state == condition.state
                    for o in state.objects)
        return value, None
    if state.zone(condition.zone) is None:
        return False, (f"condition on {condition.category} references"
                       f" missing zone {condition.zone!r}")
    present = bool(objects_in_zone(state, condition.zone, condition.category))
    if condition.kind == IS_IN:
        return present, None
    return not present, None


def _condition_filter(condition: Condition, category: str,
                      state: PerceivedState) -> Optional[Set[int]]:
    """The satisfying id set a condition contributes as a candidate filter,
    or None when it does not constrain this category."""
    if condition.category != category or condition.kind == IS_NOT_IN:
        return None
    if condition.kind == IS_IN:
        return {o.id for o in objects_in_zone(state, condition.zone, category)}
    return {o.id for o in state.objects
            if o.category == category and o.state == condition.state}


def candidate_set(conditions: Sequence[Condition], action: MoveAction,
                  state: PerceivedState) -> List[int]:
    """Objects the action could use, ordered by id: category members in the
    source zone, narrowed by every same-category presence/state condition."""
    base = sorted(o.id for o in objects_in_zone(state, action.from_zone,
                                                action.category))
    for condition in conditions:
        allowed = _condition_filter(condition, action.category, state)
        if allowed is not None:
            base = [oid for oid in base if oid in allowed]
    return base


# ---------------------------------------------------------------------------
# placements and bindings


def bind_placement(action: MoveAction,
                   state: PerceivedState) -> Optional[ActionBinding]:
    """Feasibility check plus concrete landing choice, without an object."""
    zone = state.zone(action.to_zone)
    if zone is None:
        return None
    placement = action.placement
    if isinstance(placement, MiddlePlacement):
        return ActionBinding(0, target_point=zone.rect.center)
    if isinstance(placement, GridPlacement):
        occupied = [o.position for o in state.objects
                    if o.contained_in is None and not o.held]
        cell = next_free_cell(zone.rect, placement.columns, placement.rows,
                              occupied)
        if cell is None:
            return None
        return ActionBinding(0, target_point=cell)
    containers = [o for o in state.objects
                  if o.category == placement.container and not o.held
                  and zone.rect.contains(o.position)]
    if not containers:
        return None
    chosen = min(containers, key=lambda o: o.id)
    return ActionBinding(0, container_id=chosen.id)


def bind_action(conditions: Sequence[Condition], action: MoveAction,
                state: PerceivedState) -> Optional[ActionBinding]:
    candidates = candidate_set(conditions, action, state)
    if not candidates:
        return None
    placed = bind_placement(action, state)
    if placed is None:
        return None
    return ActionBinding(candidates[0], placed.target_point,
                         placed.container_id)


def bind_all(conditions: Sequence[Condition],
             actions: Sequence[MoveAction],
             state: PerceivedState) -> Optional[Tuple[ActionBinding, ...]]:
    """Bind every action of a rule against one snapshot; None if any action
    has no candidate or no feasible placement."""
    bound = []
    for action in actions:
        binding = bind_action(conditions, action, state)
        if binding is None:
            return None
        bound.append(binding)
    return tuple(bound)


# ---------------------------------------------------------------------------
# flagging and conflicts


def flag_executable(program: Program, state: PerceivedState,
                    executor_idle: bool) -> Tuple[List[Binding], List[str]]:
    """All rules and pending buttons ready to run right now, each with its
    binding, plus any dangling-reference warnings hit along the way."""
    if not executor_idle or program.paused:
        return [], []
    flags: List[Binding] = []
    warnings: List[str] = []
    for rule in program.rules.values():
        if not rule.enabled:
            continue
        satisfied = True
        for condition in rule.conditions:
            value, warning = evaluate_condition(condition, state)
            if warning is not None:
                warnings.append(f"rule {rule.id}: {warning}")
            satisfied = satisfied and value
        if not satisfied:
            continue
        bound = bind_all(rule.conditions, rule.actions, state)
        if bound is not None:
            flags.append(Binding(rule.id, "rule", rule.actions, bound))
    for button in program.buttons.values():
        if not button.pending:
            continue
        bound = bind_all((), button.actions, state)
        if bound is not None:
            flags.append(Binding(button.id, "button", button.actions, bound))
    return flags, warnings


def detect_conflict(flags: Sequence[Binding], preferences) -> Disposition:
    """One flag runs; several flags consult the preference store and
    otherwise become a conflict that blocks dispatch until resolved."""
    if not flags:
        return Disposition("none", None, None)
    if len(flags) == 1:
        return Disposition("dispatch", flags[0], None)
    ids = tuple(f.source_id for f in flags)
    preferred = preferences.recall(ids)
    if preferred is not None and preferred in ids:
        chosen = next(f for f in flags if f.source_id == preferred)
        return Disposition("dispatch", chosen, None)
    return Disposition("conflict", None, ids)
