/**
 * Conflict popup bookkeeping.  The server owns the real preference
 * memory; this mirror exists so a remembered pair never opens a second
 * popup in the same session, even if a prompt slips through.
 */

import type { ClientFrame, PromptCandidate } from "./protocol.js";

export interface PromptModel {
  conflictId: string;
  candidates: PromptCandidate[];
}

export interface ConflictUi {
  open: PromptModel | null;
  notice: string | null;
  popupsShown: number;
  remembered: Map<string, string>;
}

export function newConflictUi(): ConflictUi {
  return { open: null, notice: null, popupsShown: 0, remembered: new Map() };
}

export function pairKey(candidateIds: string[]): string {
  return [...candidateIds].sort().join("|");
}

export interface PromptOutcome {
  ui: ConflictUi;
  /** Auto-resolution to send when the pair was already remembered. */
  reply: ClientFrame | null;
}

export function onConflictPrompt(
  ui: ConflictUi,
  prompt: PromptModel,
  requestId: string,
): PromptOutcome {
  const key = pairKey(prompt.candidates.map((c) => c.id));
  const winner = ui.remembered.get(key);
  if (winner !== undefined) {
    return {
      ui,
      reply: {
        kind: "ResolveConflict",
        request_id: requestId,
        conflict_id: prompt.conflictId,
        chosen_id: winner,
        remember: true,
      },
    };
  }
  return {
    ui: {
      ...ui,
      open: prompt,
      notice: null,
      popupsShown: ui.popupsShown + 1,
    },
    reply: null,
  };
}

function resolveFrame(
  prompt: PromptModel,
  chosenId: string,
  remember: boolean,
  requestId: string,
): ClientFrame {
  if (!prompt.candidates.some((c) => c.id === chosenId)) {
    throw new Error(`${chosenId} is not offered by this prompt`);
  }
  return {
    kind: "ResolveConflict",
    request_id: requestId,
    conflict_id: prompt.conflictId,
    chosen_id: chosenId,
    remember,
  };
}

export interface ChoiceOutcome {
  ui: ConflictUi;
  frame: ClientFrame;
}

/** "Always": resolve and remember, so the pair never prompts again. */
export function chooseAlways(
  ui: ConflictUi,
  chosenId: string,
  requestId: string,
): ChoiceOutcome {
  if (ui.open === null) {
    throw new Error("no popup is open");
  }
  const frame = resolveFrame(ui.open, chosenId, true, requestId);
  const remembered = new Map(ui.remembered);
  remembered.set(pairKey(ui.open.candidates.map((c) => c.id)), chosenId);
  return { ui: { ...ui, open: null, remembered }, frame };
}

/** "Ask Again": resolve once, keep prompting on future co-flags. */
export function chooseAskAgain(
  ui: ConflictUi,
  chosenId: string,
  requestId: string,
): ChoiceOutcome {
  if (ui.open === null) {
    throw new Error("no popup is open");
  }
  const frame = resolveFrame(ui.open, chosenId, false, requestId);
  return { ui: { ...ui, open: null }, frame };
}

/** The server withdrew the prompt (stale contenders, reset, reload). */
export function onConflictCancelled(
  ui: ConflictUi,
  conflictId: string,
  reason: string,
): ConflictUi {
  if (ui.open === null || ui.open.conflictId !== conflictId) {
    return ui;
  }
  return { ...ui, open: null, notice: `prompt withdrawn: ${reason}` };
}

/** Someone else resolved it (scripted run, second client). */
export function onConflictResolved(
  ui: ConflictUi,
  conflictId: string,
): ConflictUi {
  if (ui.open === null || ui.open.conflictId !== conflictId) {
    return ui;
  }
  return { ...ui, open: null };
}
