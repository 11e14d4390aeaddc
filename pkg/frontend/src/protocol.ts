/**
 * Frame and payload shapes shared with the session service, plus the
 * canonical JSON form used when sending commands.
 */

export interface RectPayload {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface ZonePayload {
  id: string;
  color: string;
  rect: RectPayload;
}

export type PlacementPayload =
  | { kind: "middle" }
  | { kind: "grid"; columns: number; rows: number }
  | { kind: "inside"; container: string };

export type Predicate = "is_in" | "is_not_in" | "has_state";

export interface ConditionPayload {
  kind: Predicate;
  category: string;
  zone: string | null;
  state: string | null;
}

export interface ActionPayload {
  category: string;
  from_zone: string;
  to_zone: string;
  placement: PlacementPayload;
}

export interface RulePayload {
  id: string;
  conditions: ConditionPayload[];
  actions: ActionPayload[];
  enabled: boolean;
}

export interface ButtonPayload {
  id: string;
  label: string;
  actions: ActionPayload[];
  pending: boolean;
}

export interface ObjectPayload {
  id: number;
  category: string;
  position: [number, number];
  state: string | null;
  contained_in: number | null;
  held: boolean;
}

export interface SnapshotPayload {
  tick: number;
  objects: ObjectPayload[];
  zones: ZonePayload[];
  executor: { status: string; [key: string]: unknown };
  paused: boolean;
  open_conflict: string | null;
  wall_ms?: number;
}

export interface Catalog {
  categories: string[];
  zones: string[];
  states: Record<string, string[]>;
  containers: string[];
}

export interface EventRecord {
  seq: number;
  tick: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface PromptCandidate {
  id: string;
  description: string;
  conditions: string[];
  actions: string[];
  binding: unknown;
}

export type ServerFrame =
  | { kind: "Hello"; version: string; session_id: string; tick: number }
  | { kind: "Snapshot"; seq: number; tick: number;
      snapshot: SnapshotPayload }
  | { kind: "Event"; seq: number; event: EventRecord }
  | { kind: "Ack"; request_id: string }
  | { kind: "Error"; request_id: string | null; reason: string;
      seq?: number }
  | { kind: "ConflictPrompt"; seq: number; tick: number;
      conflict_id: string; candidates: PromptCandidate[] };

export interface ClientFrame {
  kind: string;
  request_id: string;
  [key: string]: unknown;
}

/**
 * Serialize to the same text the service tooling produces: keys sorted,
 * ", " between items and ": " after keys.  Golden-file comparisons of
 * outgoing frames rely on this byte-for-byte.
 */
export function canonicalJson(value: unknown): string {
  if (value === null) {
    return "null";
  }
  if (typeof value === "boolean" || typeof value === "number") {
    return String(value);
  }
  if (typeof value === "string") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(", ") + "]";
  }
  if (typeof value === "object") {
    const record = value as Record<string, unknown>;
    const keys = Object.keys(record)
      .filter((k) => record[k] !== undefined)
      .sort();
    const parts = keys.map(
      (k) => JSON.stringify(k) + ": " + canonicalJson(record[k]),
    );
    return "{" + parts.join(", ") + "}";
  }
  throw new Error(`cannot serialize a ${typeof value}`);
}
