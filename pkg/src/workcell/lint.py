"""Symbolic program checks: rule chains, likely conflicts, livelocks.

The analysis works over categories, zones, and states only; it never counts
object instances.  That makes it an over-approximation: everything it
reports *can* happen in some world, and every chain that actually shows up
in a run is reported, but a finding is not proof of a problem.  The point
is to warn the author, not to verify the program.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .program import (HAS_STATE, IS_IN, IS_NOT_IN, Condition, InsidePlacement,
                      MoveAction, Program, describe_condition,
                      validate_action, validate_rule)
from .scenario import Scenario


@dataclass(frozen=True)
class Effect:
    """One symbolic consequence of running a move action."""

    kind: str  # "appears" | "departs" | "gains_state"
    category: str
    zone: Optional[str] = None
    state: Optional[str] = None

    def describe(self) -> str:
        if self.kind == "appears":
            return f"{self.category} appears in {self.zone}"
        if self.kind == "departs":
            return f"{self.category} leaves {self.zone}"
        return f"{self.category} becomes {self.state}"


@dataclass(frozen=True)
class ChainEdge:
    """Running `source` can make a condition of `target` true."""

    source: str
    target: str
    effect: str
    condition: str

    def describe(self) -> str:
        return (f"{self.source} -> {self.target}:"
                f" {self.effect} satisfies '{self.condition}'")


@dataclass(frozen=True)
class LintReport:
    chains: Tuple[ChainEdge, ...] = ()
    conflicts: Tuple[Tuple[str, str], ...] = ()
    self_retriggers: Tuple[Tuple[str, str], ...] = ()  # (rule id, why)
    dangling: Tuple[Tuple[str, str], ...] = ()  # (source id, problem)

    @property
    def clean(self) -> bool:
        return not (self.chains or self.conflicts or self.self_retriggers
                    or self.dangling)

    def to_payload(self) -> Dict[str, object]:
        return {
            "chains": [{"source": e.source, "target": e.target,
                        "effect": e.effect, "condition": e.condition}
                       for e in self.chains],
            "conflicts": [list(pair) for pair in self.conflicts],
            "self_retriggers": [{"rule_id": rule_id, "reason": reason}
                                for rule_id, reason in self.self_retriggers],
            "dangling": [{"source": source, "problem": problem}
                         for source, problem in self.dangling],
        }

    def render(self) -> str:
        lines: List[str] = []
        if self.chains:
            lines.append("chain edges:")
            lines.extend(f"  {edge.describe()}" for edge in self.chains)
        if self.conflicts:
            lines.append("potential conflicts:")
            lines.extend(f"  {a} <-> {b}" for a, b in self.conflicts)
        if self.self_retriggers:
            lines.append("self-retrigger risks:")
            lines.extend(f"  {rule_id}: {reason}"
                         for rule_id, reason in self.self_retriggers)
        if self.dangling:
            lines.append("dangling references:")
            lines.extend(f"  {source}: {problem}"
                         for source, problem in self.dangling)
        if not lines:
            lines.append("no findings")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# symbolic effects


def action_effects(action: MoveAction, scenario: Scenario) -> List[Effect]:
    """What a move can make true, ignoring instance counts."""
    effects = [
        Effect("appears", action.category, zone=action.to_zone),
        Effect("departs", action.category, zone=action.from_zone),
    ]
    if isinstance(action.placement, InsidePlacement):
        for rule in scenario.combinations:
            if (rule.part_category == action.category
                    and rule.target_category == action.placement.container
                    and rule.resulting_target_state is not None):
                effects.append(Effect("gains_state", rule.target_category,
                                      state=rule.resulting_target_state))
    return effects


def effect_satisfies(effect: Effect, condition: Condition) -> bool:
    if effect.kind == "appears" and condition.kind == IS_IN:
        return (effect.category == condition.category
                and effect.zone == condition.zone)
    if effect.kind == "departs" and condition.kind == IS_NOT_IN:
        return (effect.category == condition.category
                and effect.zone == condition.zone)
    if effect.kind == "gains_state" and condition.kind == HAS_STATE:
        return (effect.category == condition.category
                and effect.state == condition.state)
    return False


def action_can_falsify(action: MoveAction, condition: Condition,
                       scenario: Scenario) -> bool:
    """Whether running the action can make the condition false."""
    if condition.kind == IS_IN:
        if action.category != condition.category:
            return False
        if action.from_zone != condition.zone:
            return False
        if action.to_zone != condition.zone:
            return True
        # moving within the zone only helps if the object can be absorbed
        if isinstance(action.placement, InsidePlacement):
            return any(rule.part_category == action.category
                       and rule.target_category == action.placement.container
                       and rule.part_fate == "absorbed"
                       for rule in scenario.combinations)
        return False
    if condition.kind == IS_NOT_IN:
        return (action.category == condition.category
                and action.to_zone == condition.zone)
    # has_state: only a combination can move the target out of the state
    if not isinstance(action.placement, InsidePlacement):
        return False
    for rule in scenario.combinations:
        if (rule.part_category == action.category
                and rule.target_category == action.placement.container
                and rule.target_category == condition.category
                and rule.resulting_target_state is not None
                and rule.resulting_target_state != condition.state
                and rule.required_target_state in (None, condition.state)):
            return True
    return False


# ---------------------------------------------------------------------------
# the checks


def _sources(program: Program) -> List[Tuple[str, Tuple[Condition, ...],
                                             Tuple[MoveAction, ...]]]:
    """Rules and buttons as (id, conditions, actions), enabled rules first,
    buttons treated as condition-free action sets."""
    entries = [(rule.id, rule.conditions, rule.actions)
               for rule in program.rules.values() if rule.enabled]
    entries.extend((button.id, (), button.actions)
                   for button in program.buttons.values())
    return entries


def chain_edges(program: Program, scenario: Scenario) -> List[ChainEdge]:
    edges = []
    sources = _sources(program)
    for source_id, _, actions in sources:
        effects = [effect for action in actions
                   for effect in action_effects(action, scenario)]
        for target_id, conditions, _ in sources:
            for condition in conditions:
                for effect in effects:
                    if effect_satisfies(effect, condition):
                        edges.append(ChainEdge(
                            source_id, target_id, effect.describe(),
                            describe_condition(condition)))
    return edges


def _conditions_compatible(left: Tuple[Condition, ...],
                           right: Tuple[Condition, ...]) -> bool:
    """Symbolic satisfiability of the conjunction of both condition sets:
    the only impossible combination is is_in vs is_not_in on the same
    category and zone (distinct instances can satisfy anything else)."""
    for a in left + right:
        for b in left + right:
            if (a.kind == IS_IN and b.kind == IS_NOT_IN
                    and a.category == b.category and a.zone == b.zone):
                return False
    return True


def potential_conflicts(program: Program) -> List[Tuple[str, str]]:
    rules = [rule for rule in program.rules.values() if rule.enabled]
    pairs = []
    for i, first in enumerate(rules):
        for second in rules[i + 1:]:
            if _conditions_compatible(first.conditions, second.conditions):
                pairs.append((first.id, second.id))
    return pairs


def self_retriggers(program: Program,
                    scenario: Scenario) -> List[Tuple[str, str]]:
    found = []
    for rule in program.rules.values():
        if not rule.enabled or not rule.conditions:
            continue
        stuck = [condition for condition in rule.conditions
                 if not any(action_can_falsify(action, condition, scenario)
                            for action in rule.actions)]
        if len(stuck) == len(rule.conditions):
            conditions = " and ".join(describe_condition(c) for c in stuck)
            found.append((rule.id,
                          f"no action of the rule can falsify {conditions}"))
    return found


def dangling_references(program: Program,
                        scenario: Scenario) -> List[Tuple[str, str]]:
    found = []
    for rule in program.rules.values():
        label = rule.id if rule.enabled else f"{rule.id} (disabled)"
        for problem in validate_rule(rule, scenario, program.zones):
            found.append((label, problem))
    for button in program.buttons.values():
        for i, action in enumerate(button.actions):
            for problem in validate_action(action, scenario, program.zones,
                                           f"actions[{i}]"):
                found.append((button.id, problem))
    return found


def lint_program(program: Program, scenario: Scenario) -> LintReport:
    return LintReport(
        chains=tuple(chain_edges(program, scenario)),
        conflicts=tuple(potential_conflicts(program)),
        self_retriggers=tuple(self_retriggers(program, scenario)),
        dangling=tuple(dangling_references(program, scenario)),
    )
