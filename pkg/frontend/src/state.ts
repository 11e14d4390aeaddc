/**
 * Event-sourced program model.  The UI never mutates this directly in
 * response to user input; it only folds server events, so replaying the
 * stored stream after a reload reproduces the exact same view.
 */

import type {
  ActionPayload,
  ButtonPayload,
  ConditionPayload,
  EventRecord,
  PlacementPayload,
  RulePayload,
  SnapshotPayload,
  ZonePayload,
} from "./protocol.js";

export interface ProgramModel {
  zones: ZonePayload[];
  rules: RulePayload[];
  buttons: ButtonPayload[];
  paused: boolean;
  lastSeq: number;
}

export function emptyModel(): ProgramModel {
  return { zones: [], rules: [], buttons: [], paused: false, lastSeq: -1 };
}

function upsert<T extends { id: string }>(items: T[], item: T): T[] {
  const index = items.findIndex((existing) => existing.id === item.id);
  if (index < 0) {
    return [...items, item];
  }
  const next = items.slice();
  next[index] = item;
  return next;
}

function drop<T extends { id: string }>(items: T[], id: string): T[] {
  return items.filter((item) => item.id !== id);
}

/** Fold one server event into the model; unknown kinds pass through. */
export function applyEvent(
  model: ProgramModel,
  event: EventRecord,
): ProgramModel {
  const next = { ...model, lastSeq: Math.max(model.lastSeq, event.seq) };
  const payload = event.payload as Record<string, any>;
  switch (event.kind) {
    case "ZoneCreated":
    case "ZoneUpdated":
      next.zones = upsert(model.zones, payload.zone as ZonePayload);
      break;
    case "ZoneDeleted": {
      next.zones = drop(model.zones, payload.zone_id as string);
      const disabled = new Set<string>(payload.disabled_rules ?? []);
      next.rules = model.rules.map((rule) =>
        disabled.has(rule.id) ? { ...rule, enabled: false } : rule,
      );
      break;
    }
    case "RuleCreated":
      next.rules = upsert(model.rules, payload.rule as RulePayload);
      break;
    case "RuleDeleted":
      next.rules = drop(model.rules, payload.rule_id as string);
      break;
    case "ButtonCreated":
      next.buttons = upsert(model.buttons, payload.button as ButtonPayload);
      break;
    case "ButtonPressed":
      next.buttons = model.buttons.map((button) =>
        button.id === payload.button_id
          ? { ...button, pending: true }
          : button,
      );
      break;
    case "ActionStarted":
      if (payload.source_kind === "button") {
        next.buttons = model.buttons.map((button) =>
          button.id === payload.source_id
            ? { ...button, pending: false }
            : button,
        );
      }
      break;
    case "Paused":
      next.paused = true;
      break;
    case "Resumed":
      next.paused = false;
      break;
    case "WorkspaceReset":
      next.buttons = model.buttons.map((button) =>
        button.pending ? { ...button, pending: false } : button,
      );
      break;
    default:
      break;
  }
  return next;
}

export function replay(events: EventRecord[]): ProgramModel {
  return events.reduce(applyEvent, emptyModel());
}

// ---------------------------------------------------------------------------
// rendering rules as text, and reading that text back

export function describeCondition(condition: ConditionPayload): string {
  if (condition.kind === "is_in") {
    return `${condition.category} is in ${condition.zone}`;
  }
  if (condition.kind === "is_not_in") {
    return `no ${condition.category} is in ${condition.zone}`;
  }
  return `${condition.category} is ${condition.state}`;
}

export function describePlacement(placement: PlacementPayload): string {
  if (placement.kind === "grid") {
    return `on a ${placement.columns}x${placement.rows} grid`;
  }
  if (placement.kind === "inside") {
    return `inside a ${placement.container}`;
  }
  return "in the middle";
}

export function describeAction(action: ActionPayload): string {
  return (
    `move ${action.category} from ${action.from_zone}` +
    ` to ${action.to_zone}, place ${describePlacement(action.placement)}`
  );
}

export function describeRule(rule: {
  conditions: ConditionPayload[];
  actions: ActionPayload[];
}): string {
  const conditions = rule.conditions.map(describeCondition).join(" and ");
  const actions = rule.actions.map(describeAction).join("; then ");
  return `if ${conditions} then ${actions}`;
}

/** One line per rule, with a badge when a zone deletion disabled it. */
export function programSummary(model: ProgramModel): string[] {
  return model.rules.map((rule) => {
    const line = `${rule.id}: ${describeRule(rule)}`;
    return rule.enabled ? line : `${line} (disabled)`;
  });
}

export function parseCondition(text: string): ConditionPayload {
  let match = text.match(/^no (\S+) is in (\S+)$/);
  if (match) {
    return {
      kind: "is_not_in",
      category: match[1],
      zone: match[2],
      state: null,
    };
  }
  match = text.match(/^(\S+) is in (\S+)$/);
  if (match) {
    return { kind: "is_in", category: match[1], zone: match[2], state: null };
  }
  match = text.match(/^(\S+) is (\S+)$/);
  if (match) {
    return {
      kind: "has_state",
      category: match[1],
      zone: null,
      state: match[2],
    };
  }
  throw new Error(`unreadable condition: ${text}`);
}

function parsePlacement(text: string): PlacementPayload {
  if (text === "in the middle") {
    return { kind: "middle" };
  }
  let match = text.match(/^on a (\d+)x(\d+) grid$/);
  if (match) {
    return {
      kind: "grid",
      columns: Number(match[1]),
      rows: Number(match[2]),
    };
  }
  match = text.match(/^inside a (\S+)$/);
  if (match) {
    return { kind: "inside", container: match[1] };
  }
  throw new Error(`unreadable placement: ${text}`);
}

export function parseAction(text: string): ActionPayload {
  const match = text.match(/^move (\S+) from (\S+) to (\S+), place (.+)$/);
  if (!match) {
    throw new Error(`unreadable action: ${text}`);
  }
  return {
    category: match[1],
    from_zone: match[2],
    to_zone: match[3],
    placement: parsePlacement(match[4]),
  };
}

/** Inverse of describeRule, used to check summaries never drift. */
export function parseRuleSummary(text: string): {
  conditions: ConditionPayload[];
  actions: ActionPayload[];
} {
  const match = text.match(/^if (.+?) then (.+)$/);
  if (!match) {
    throw new Error(`unreadable rule summary: ${text}`);
  }
  return {
    conditions: match[1].split(" and ").map(parseCondition),
    actions: match[2].split("; then ").map(parseAction),
  };
}

// ---------------------------------------------------------------------------
// the rest of the view state

export interface ViewModel {
  snapshot: SnapshotPayload | null;
  program: ProgramModel;
}

export function emptyView(): ViewModel {
  return { snapshot: null, program: emptyModel() };
}
