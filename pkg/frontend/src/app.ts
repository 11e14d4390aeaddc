/**
 * Browser wiring: opens a session against the service, connects the
 * websocket, and binds the canvas, wizard form, program summary, and
 * conflict popup to the pure modules.
 */

import { SessionClient } from "./client.js";
import {
  chooseAlways,
  chooseAskAgain,
} from "./conflict.js";
import type {
  Catalog,
  EventRecord,
  ServerFrame,
} from "./protocol.js";
import { programSummary } from "./state.js";
import {
  addAction,
  addCondition,
  advance,
  autofillAction,
  back,
  canAdvance,
  canConfirm,
  conditionOptions,
  actionOptions,
  createRuleFrame,
  removeAction,
  removeCondition,
  startWizard,
  summaryLines,
  type WizardState,
} from "./wizard.js";
import { render, fitViewport, toWorkspace, type TruthObject }
  from "./render.js";
import { beginDrag, endDrag, hitTest, moveDrag, deleteZoneFrame,
         type DragState } from "./zones.js";

const API = `${location.protocol}//${location.host}`;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

async function openSession(scenario: string): Promise<{
  sessionId: string;
  categories: Array<{ name: string; is_container: boolean;
                      states: string[] }>;
  table: { width: number; height: number };
}> {
  const response = await fetch(`${API}/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ scenario }),
  });
  if (!response.ok) {
    throw new Error(await response.text());
  }
  const body = await response.json();
  const tables = body.scenario.tables as Record<
    string,
    { x: number; y: number; width: number; height: number }
  >;
  let width = 1.2;
  let height = 1.0;
  for (const rect of Object.values(tables)) {
    width = Math.max(width, rect.x + rect.width);
    height = Math.max(height, rect.y + rect.height);
  }
  return {
    sessionId: body.session_id,
    categories: body.scenario.categories,
    table: { width, height },
  };
}

async function main(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const scenario = params.get("scenario") ?? "sorting";
  const opened = await openSession(scenario);
  const sessionId = opened.sessionId;

  const socket = new WebSocket(
    `${API.replace("http", "ws")}/sessions/${sessionId}/ws`,
  );
  const client = new SessionClient(
    { send: (text) => socket.send(text) },
    {
      fetchEvents: async (since: number): Promise<EventRecord[]> => {
        const response = await fetch(
          `${API}/sessions/${sessionId}/events?since=${since}`,
        );
        return (await response.json()).events;
      },
    },
  );

  const canvas = el<HTMLCanvasElement>("workspace");
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("no 2d context");
  }
  const view = fitViewport(canvas, opened.table.width,
                           opened.table.height);

  let wizard: WizardState | null = null;
  let drag: DragState | null = null;
  let selectedObject: number | null = null;
  let truth: TruthObject[] | null = null;
  let tool: "zone" | "hand" | "delete" = "hand";

  function catalog(): Catalog {
    return client.catalogFromSnapshot(opened.categories);
  }

  // -- rendering ----------------------------------------------------------

  function redraw(): void {
    render(ctx as CanvasRenderingContext2D, view, client.snapshot, {
      drag,
      selectedObject,
      truth,
    });
    renderSummary();
    renderConflict();
    renderWizard();
    el<HTMLElement>("status").textContent = client.snapshot
      ? `tick ${client.snapshot.tick}` +
        (client.snapshot.paused ? " (paused)" : "")
      : "connecting";
    const pauseButton = el<HTMLButtonElement>("pause");
    pauseButton.textContent = client.snapshot?.paused
      ? "Resume"
      : "Pause";
  }

  function renderSummary(): void {
    const list = el<HTMLUListElement>("summary");
    list.textContent = "";
    for (const line of programSummary(client.program)) {
      const item = document.createElement("li");
      item.textContent = line;
      const ruleId = line.split(":")[0];
      const remove = document.createElement("button");
      remove.textContent = "delete";
      remove.onclick = () => client.command("DeleteRule",
                                           { rule_id: ruleId });
      item.appendChild(remove);
      list.appendChild(item);
    }
  }

  function renderConflict(): void {
    const popup = el<HTMLElement>("conflict");
    const prompt = client.conflicts.open;
    popup.style.display = prompt === null ? "none" : "block";
    if (prompt === null) {
      return;
    }
    const body = el<HTMLElement>("conflict-body");
    body.textContent = "";
    for (const candidate of prompt.candidates) {
      const row = document.createElement("div");
      row.className = "candidate";
      const text = document.createElement("p");
      text.textContent = candidate.description;
      row.appendChild(text);
      const always = document.createElement("button");
      always.textContent = "Always";
      always.onclick = () => {
        const outcome = chooseAlways(
          client.conflicts, candidate.id, client.nextRequestId());
        client.conflicts = outcome.ui;
        client.send(outcome.frame);
        redraw();
      };
      const once = document.createElement("button");
      once.textContent = "Ask Again";
      once.onclick = () => {
        const outcome = chooseAskAgain(
          client.conflicts, candidate.id, client.nextRequestId());
        client.conflicts = outcome.ui;
        client.send(outcome.frame);
        redraw();
      };
      row.appendChild(always);
      row.appendChild(once);
      body.appendChild(row);
    }
  }

  function renderWizard(): void {
    const panel = el<HTMLElement>("wizard");
    panel.style.display = wizard === null ? "none" : "block";
    if (wizard === null) {
      return;
    }
    el<HTMLElement>("wizard-step").textContent = `Step ${wizard.step}`;
    const lines = el<HTMLUListElement>("wizard-lines");
    lines.textContent = "";
    summaryLines(wizard).forEach((line, index) => {
      const item = document.createElement("li");
      item.textContent = line;
      if (wizard !== null && wizard.step === 3) {
        const remove = document.createElement("button");
        remove.textContent = "x";
        remove.onclick = () => {
          if (wizard === null) {
            return;
          }
          wizard =
            index < wizard.conditions.length
              ? removeCondition(wizard, index)
              : removeAction(wizard, index - wizard.conditions.length);
          redraw();
        };
        item.appendChild(remove);
      }
      lines.appendChild(item);
    });
    el<HTMLElement>("wizard-form-conditions").style.display =
      wizard.step === 1 ? "block" : "none";
    el<HTMLElement>("wizard-form-actions").style.display =
      wizard.step === 2 ? "block" : "none";
    el<HTMLButtonElement>("wizard-next").disabled = !canAdvance(wizard);
    el<HTMLButtonElement>("wizard-confirm").disabled =
      !canConfirm(wizard);
    fillConditionForm();
    fillActionForm();
  }

  function options(select: HTMLSelectElement, values: string[]): void {
    const previous = select.value;
    select.textContent = "";
    for (const value of values) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      select.appendChild(option);
    }
    if (values.includes(previous)) {
      select.value = previous;
    }
  }

  function fillConditionForm(): void {
    const offered = conditionOptions(catalog());
    options(el<HTMLSelectElement>("cond-category"), offered.categories);
    options(el<HTMLSelectElement>("cond-kind"), offered.predicates);
    const kind = el<HTMLSelectElement>("cond-kind").value;
    const category = el<HTMLSelectElement>("cond-category").value;
    const parameter = el<HTMLSelectElement>("cond-parameter");
    options(
      parameter,
      kind === "has_state" ? offered.statesFor(category) : offered.zones,
    );
  }

  function fillActionForm(): void {
    if (wizard === null) {
      return;
    }
    const offered = actionOptions(catalog());
    const defaults = autofillAction(wizard, catalog());
    const category = el<HTMLSelectElement>("act-category");
    const from = el<HTMLSelectElement>("act-from");
    const to = el<HTMLSelectElement>("act-to");
    const placement = el<HTMLSelectElement>("act-placement");
    const container = el<HTMLSelectElement>("act-container");
    options(category, offered.categories);
    options(from, offered.sources);
    options(to, offered.destinations);
    options(placement, offered.placements);
    options(container, offered.containers);
    if (!category.dataset.touched) {
      category.value = defaults.category;
    }
    if (!from.dataset.touched) {
      from.value = defaults.from_zone;
    }
    el<HTMLElement>("act-grid").style.display =
      placement.value === "grid" ? "inline" : "none";
    container.style.display =
      placement.value === "inside" ? "inline" : "none";
  }

  // -- command wiring -----------------------------------------------------

  el<HTMLButtonElement>("pause").onclick = () => {
    client.command(client.snapshot?.paused ? "Resume" : "Pause");
  };
  el<HTMLButtonElement>("reset").onclick = () => {
    client.command("ResetWorkspace");
  };
  el<HTMLButtonElement>("truth-toggle").onclick = async () => {
    if (truth !== null) {
      truth = null;
      redraw();
      return;
    }
    const response = await fetch(`${API}/sessions/${sessionId}/truth`);
    truth = (await response.json()).objects;
    redraw();
  };
  for (const value of ["hand", "zone", "delete"] as const) {
    el<HTMLInputElement>(`tool-${value}`).onclick = () => {
      tool = value;
    };
  }

  el<HTMLButtonElement>("wizard-open").onclick = () => {
    wizard = startWizard();
    redraw();
  };
  el<HTMLButtonElement>("wizard-next").onclick = () => {
    if (wizard !== null) {
      wizard = advance(wizard);
      redraw();
    }
  };
  el<HTMLButtonElement>("wizard-back").onclick = () => {
    if (wizard !== null) {
      wizard = back(wizard);
      redraw();
    }
  };
  el<HTMLButtonElement>("wizard-cancel").onclick = () => {
    wizard = null;
    redraw();
  };
  el<HTMLButtonElement>("cond-add").onclick = () => {
    if (wizard === null) {
      return;
    }
    const kind = el<HTMLSelectElement>("cond-kind")
      .value as "is_in" | "is_not_in" | "has_state";
    const category = el<HTMLSelectElement>("cond-category").value;
    const parameter = el<HTMLSelectElement>("cond-parameter").value;
    wizard = addCondition(
      wizard,
      {
        kind,
        category,
        zone: kind === "has_state" ? null : parameter,
        state: kind === "has_state" ? parameter : null,
      },
      catalog(),
    );
    redraw();
  };
  el<HTMLButtonElement>("act-add").onclick = () => {
    if (wizard === null) {
      return;
    }
    const placementKind = el<HTMLSelectElement>("act-placement")
      .value as "middle" | "grid" | "inside";
    const placement =
      placementKind === "middle"
        ? ({ kind: "middle" } as const)
        : placementKind === "grid"
          ? ({
              kind: "grid",
              columns: Number(el<HTMLInputElement>("act-cols").value),
              rows: Number(el<HTMLInputElement>("act-rows").value),
            } as const)
          : ({
              kind: "inside",
              container: el<HTMLSelectElement>("act-container").value,
            } as const);
    wizard = addAction(
      wizard,
      {
        category: el<HTMLSelectElement>("act-category").value,
        from_zone: el<HTMLSelectElement>("act-from").value,
        to_zone: el<HTMLSelectElement>("act-to").value,
        placement,
      },
      catalog(),
    );
    redraw();
  };
  el<HTMLButtonElement>("wizard-confirm").onclick = () => {
    if (wizard === null) {
      return;
    }
    client.send(createRuleFrame(wizard, client.nextRequestId()));
    wizard = null;
    redraw();
  };

  // -- canvas gestures ----------------------------------------------------

  function pointerPoint(event: MouseEvent): [number, number] {
    const bounds = canvas.getBoundingClientRect();
    return toWorkspace(view, [
      event.clientX - bounds.left,
      event.clientY - bounds.top,
    ]);
  }

  canvas.onmousedown = (event) => {
    const point = pointerPoint(event);
    if (tool === "zone") {
      drag = beginDrag(point);
    } else if (tool === "delete") {
      const zone = hitTest(client.snapshot?.zones ?? [], point);
      if (zone !== null) {
        client.send(deleteZoneFrame(zone.id, client.nextRequestId()));
      }
    } else {
      const objects = client.snapshot?.objects ?? [];
      const near = objects.find(
        (o) =>
          o.contained_in === null &&
          Math.hypot(o.position[0] - point[0],
                     o.position[1] - point[1]) < 0.03,
      );
      if (near !== undefined) {
        selectedObject = near.id;
      } else if (selectedObject !== null) {
        client.command("HumanOp", {
          op: {
            op: "relocate",
            object_id: selectedObject,
            position: [point[0], point[1]],
          },
        });
        selectedObject = null;
      }
    }
    redraw();
  };
  canvas.onmousemove = (event) => {
    if (drag !== null) {
      drag = moveDrag(drag, pointerPoint(event));
      redraw();
    }
  };
  canvas.onmouseup = () => {
    if (drag !== null) {
      const frame = endDrag(drag, client.nextRequestId());
      drag = null;
      if (frame !== null) {
        client.send(frame);
      }
      redraw();
    }
  };

  // -- socket lifecycle ---------------------------------------------------

  socket.onmessage = (message) => {
    client.handleFrame(JSON.parse(message.data as string) as ServerFrame);
    redraw();
  };
  socket.onopen = () => {
    void client.resync().then(redraw);
  };

  redraw();
}

void main();
