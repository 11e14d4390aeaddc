/**
 * Three-step rule wizard: collect conditions, collect actions, confirm a
 * summary.  Dropdown choices come exclusively from the session catalog,
 * so only things the robot can currently see are offered.  All helpers
 * are pure; the DOM layer just renders the returned state.
 */

import type {
  ActionPayload,
  Catalog,
  ClientFrame,
  ConditionPayload,
  PlacementPayload,
  Predicate,
} from "./protocol.js";
import { describeAction, describeCondition } from "./state.js";

export interface WizardState {
  step: 1 | 2 | 3;
  conditions: ConditionPayload[];
  actions: ActionPayload[];
}

export const PREDICATES: Predicate[] = ["is_in", "is_not_in", "has_state"];

export function startWizard(): WizardState {
  return { step: 1, conditions: [], actions: [] };
}

// ---------------------------------------------------------------------------
// dropdown option sets

export interface ConditionOptions {
  categories: string[];
  predicates: Predicate[];
  zones: string[];
  statesFor: (category: string) => string[];
}

export function conditionOptions(catalog: Catalog): ConditionOptions {
  return {
    categories: [...catalog.categories],
    predicates: [...PREDICATES],
    zones: [...catalog.zones],
    statesFor: (category) => catalog.states[category] ?? [],
  };
}

export interface ActionOptions {
  categories: string[];
  sources: string[];
  destinations: string[];
  placements: Array<PlacementPayload["kind"]>;
  containers: string[];
}

export function actionOptions(catalog: Catalog): ActionOptions {
  return {
    categories: [...catalog.categories],
    sources: [...catalog.zones],
    destinations: [...catalog.zones],
    placements: ["middle", "grid", "inside"],
    containers: [...catalog.containers],
  };
}

// ---------------------------------------------------------------------------
// building up the draft

function checkCondition(
  condition: ConditionPayload,
  catalog: Catalog,
): void {
  if (!catalog.categories.includes(condition.category)) {
    throw new Error(`${condition.category} is not in the workspace`);
  }
  if (condition.kind === "has_state") {
    const states = catalog.states[condition.category] ?? [];
    if (!condition.state || !states.includes(condition.state)) {
      throw new Error(
        `${condition.category} has no state ${condition.state}`,
      );
    }
  } else if (!condition.zone || !catalog.zones.includes(condition.zone)) {
    throw new Error(`no zone ${condition.zone}`);
  }
}

export function addCondition(
  wizard: WizardState,
  condition: ConditionPayload,
  catalog: Catalog,
): WizardState {
  checkCondition(condition, catalog);
  return { ...wizard, conditions: [...wizard.conditions, condition] };
}

export function removeCondition(
  wizard: WizardState,
  index: number,
): WizardState {
  return {
    ...wizard,
    conditions: wizard.conditions.filter((_, i) => i !== index),
  };
}

/**
 * Prefill for a new action row: the category of the most recent
 * condition, sourced from the zone of the most recent is_in condition.
 */
export function autofillAction(
  wizard: WizardState,
  catalog: Catalog,
): ActionPayload {
  const lastCondition = wizard.conditions[wizard.conditions.length - 1];
  const category =
    lastCondition?.category ?? catalog.categories[0] ?? "";
  const lastIsIn = [...wizard.conditions]
    .reverse()
    .find((c) => c.kind === "is_in");
  const fromZone = lastIsIn?.zone ?? catalog.zones[0] ?? "";
  const toZone =
    catalog.zones.find((z) => z !== fromZone) ?? fromZone;
  return {
    category,
    from_zone: fromZone,
    to_zone: toZone,
    placement: { kind: "middle" },
  };
}

export function addAction(
  wizard: WizardState,
  action: ActionPayload,
  catalog: Catalog,
): WizardState {
  if (!catalog.categories.includes(action.category)) {
    throw new Error(`${action.category} is not in the workspace`);
  }
  for (const zone of [action.from_zone, action.to_zone]) {
    if (!catalog.zones.includes(zone)) {
      throw new Error(`no zone ${zone}`);
    }
  }
  if (
    action.placement.kind === "inside" &&
    !catalog.containers.includes(action.placement.container)
  ) {
    throw new Error(
      `${action.placement.container} is not a container category`,
    );
  }
  return { ...wizard, actions: [...wizard.actions, action] };
}

export function removeAction(
  wizard: WizardState,
  index: number,
): WizardState {
  return {
    ...wizard,
    actions: wizard.actions.filter((_, i) => i !== index),
  };
}

// ---------------------------------------------------------------------------
// stepping and confirmation

export function canAdvance(wizard: WizardState): boolean {
  if (wizard.step === 1) {
    return wizard.conditions.length > 0;
  }
  return wizard.actions.length > 0;
}

export function advance(wizard: WizardState): WizardState {
  if (!canAdvance(wizard) || wizard.step === 3) {
    return wizard;
  }
  return { ...wizard, step: (wizard.step + 1) as 2 | 3 };
}

export function back(wizard: WizardState): WizardState {
  if (wizard.step === 1) {
    return wizard;
  }
  return { ...wizard, step: (wizard.step - 1) as 1 | 2 };
}

export function canConfirm(wizard: WizardState): boolean {
  return (
    wizard.step === 3 &&
    wizard.conditions.length > 0 &&
    wizard.actions.length > 0
  );
}

export function summaryLines(wizard: WizardState): string[] {
  return [
    ...wizard.conditions.map((c) => `when ${describeCondition(c)}`),
    ...wizard.actions.map((a) => `then ${describeAction(a)}`),
  ];
}

/** The outgoing frame; the server assigns an id when ruleId is empty. */
export function createRuleFrame(
  wizard: WizardState,
  requestId: string,
  ruleId = "",
): ClientFrame {
  if (!canConfirm(wizard)) {
    throw new Error("the wizard is not ready to confirm");
  }
  return {
    kind: "CreateRule",
    request_id: requestId,
    rule: {
      id: ruleId,
      conditions: wizard.conditions.map((c) => ({
        kind: c.kind,
        category: c.category,
        zone: c.zone,
        state: c.state,
      })),
      actions: wizard.actions.map((a) => ({
        category: a.category,
        from_zone: a.from_zone,
        to_zone: a.to_zone,
        placement: a.placement,
      })),
      enabled: true,
    },
  };
}
