/**
 * Session client: folds server frames into the view model and builds
 * outgoing command frames.  Transport and event fetching are injected so
 * the logic runs identically under tests and in the browser.
 */

import {
  canonicalJson,
  type Catalog,
  type ClientFrame,
  type EventRecord,
  type ServerFrame,
  type SnapshotPayload,
} from "./protocol.js";
import {
  newConflictUi,
  onConflictCancelled,
  onConflictPrompt,
  onConflictResolved,
  type ConflictUi,
} from "./conflict.js";
import {
  applyEvent,
  emptyModel,
  type ProgramModel,
} from "./state.js";

export interface Transport {
  send(text: string): void;
}

export interface EventSource {
  fetchEvents(since: number): Promise<EventRecord[]>;
}

export class SessionClient {
  snapshot: SnapshotPayload | null = null;
  program: ProgramModel = emptyModel();
  conflicts: ConflictUi = newConflictUi();
  errors: Array<{ requestId: string | null; reason: string }> = [];
  pending = new Set<string>();
  private requestCounter = 0;

  constructor(
    private readonly transport: Transport,
    private readonly events: EventSource,
  ) {}

  nextRequestId(): string {
    this.requestCounter += 1;
    return `ui-${this.requestCounter}`;
  }

  send(frame: ClientFrame): void {
    this.pending.add(frame.request_id);
    this.transport.send(canonicalJson(frame));
  }

  command(kind: string, fields: Record<string, unknown> = {}): string {
    const requestId = this.nextRequestId();
    this.send({ kind, request_id: requestId, ...fields });
    return requestId;
  }

  handleFrame(frame: ServerFrame): void {
    switch (frame.kind) {
      case "Hello":
        break;
      case "Snapshot":
        this.snapshot = frame.snapshot;
        this.bumpSeq(frame.seq);
        break;
      case "Event":
        this.handleEvent(frame.event);
        break;
      case "Ack":
        this.pending.delete(frame.request_id);
        break;
      case "Error":
        if (frame.request_id !== null) {
          this.pending.delete(frame.request_id);
        }
        this.errors.push({
          requestId: frame.request_id,
          reason: frame.reason,
        });
        break;
      case "ConflictPrompt": {
        this.bumpSeq(frame.seq);
        const outcome = onConflictPrompt(
          this.conflicts,
          {
            conflictId: frame.conflict_id,
            candidates: frame.candidates,
          },
          this.nextRequestId(),
        );
        this.conflicts = outcome.ui;
        if (outcome.reply !== null) {
          this.send(outcome.reply);
        }
        break;
      }
    }
  }

  /** Every folded frame moves the resume cursor, snapshots included. */
  private bumpSeq(seq: number): void {
    if (seq > this.program.lastSeq) {
      this.program = { ...this.program, lastSeq: seq };
    }
  }

  private handleEvent(event: EventRecord): void {
    this.program = applyEvent(this.program, event);
    const payload = event.payload as Record<string, any>;
    if (event.kind === "ConflictCancelled") {
      this.conflicts = onConflictCancelled(
        this.conflicts,
        payload.conflict_id as string,
        (payload.reason as string) ?? "stale",
      );
    } else if (event.kind === "ConflictResolved") {
      this.conflicts = onConflictResolved(
        this.conflicts,
        payload.conflict_id as string,
      );
    }
  }

  /** Rebuild the program from the stored stream (reload, reconnect). */
  async resync(): Promise<void> {
    const events = await this.events.fetchEvents(0);
    this.program = emptyModel();
    for (const event of events) {
      this.handleEvent(event);
    }
  }

  catalogFromSnapshot(
    specs: Array<{
      name: string;
      is_container: boolean;
      states: string[];
    }>,
  ): Catalog {
    const snapshot = this.snapshot;
    const present: string[] = [];
    for (const entry of snapshot?.objects ?? []) {
      if (!present.includes(entry.category)) {
        present.push(entry.category);
      }
    }
    const byName = new Map(specs.map((s) => [s.name, s]));
    const states: Record<string, string[]> = {};
    for (const name of present) {
      const spec = byName.get(name);
      if (spec && spec.states.length > 0) {
        states[name] = [...spec.states];
      }
    }
    return {
      categories: present,
      zones: (snapshot?.zones ?? []).map((z) => z.id),
      states,
      containers: present.filter(
        (name) => byName.get(name)?.is_container ?? false,
      ),
    };
  }
}
